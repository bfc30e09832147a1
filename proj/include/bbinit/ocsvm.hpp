#pragma once

#include <Eigen/Dense>

#include "bbinit/core.hpp"
#include "bbinit/features.hpp"

namespace bbinit {

struct KernelParams {
    double gamma = 1.0;  // inverse squared length-scale
};

struct OcsvmTrainOptions {
    double tol = 1e-3;             // KKT violation tolerance
    long long max_iters = 10'000'000;
};

/// Trained one-class model: support vectors with normalised dual
/// coefficients (sum = 1) and the decision threshold rho.
struct OcsvmModel {
    Eigen::MatrixXd support_vectors;  // one row per SV
    Eigen::VectorXd alphas;
    double rho = 0.0;
    KernelParams params;
    double nu = 0.0;
    StandardizationStats stats;
};

struct OcsvmConfig {
    FeatureKind feature = FeatureKind::RgbHist;
    double nu = 0.3;
    double gamma = 1.0;
    int slic_max_iters = 10;
    OcsvmTrainOptions train;
};

double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma);

/// Solves the nu-one-class dual (min 1/2 a'Ka, 0 <= a_i <= 1/(nu N),
/// sum a = 1) by pairwise SMO with maximal-violating-pair selection.
OcsvmModel train_ocsvm(const Eigen::MatrixXd& X, double nu, double gamma,
                       const OcsvmTrainOptions& opts = {});

/// Decision score sum_i a_i k(sv_i, x) - rho; inlier iff score >= 0.
/// The input must already be standardized with the model's stats.
std::pair<double, bool> decide(const OcsvmModel& model, const Eigen::VectorXd& x);

/// Full pipeline: crop, SLIC0, bbox partition, features, train on background
/// superpixels, classify unknowns; outliers form the object mask.
BinaryMask ocsvm_segment(const Image& frame, const BoundingBox& bbox, const OcsvmConfig& config);

}  // namespace bbinit
