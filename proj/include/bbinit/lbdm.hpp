#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>

#include "bbinit/core.hpp"

namespace bbinit {

enum class ScribbleLabel : std::uint8_t { Background = 0, Unknown = 1, Object = 2 };

/// Tri-valued label image seeding the matting solve.
struct ScribbleMask {
    int width = 0;
    int height = 0;
    std::vector<ScribbleLabel> labels;

    ScribbleLabel at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

/// Per-pixel opacity, stored unclamped; clamp only for visualisation.
struct AlphaMatte {
    int width = 0;
    int height = 0;
    Eigen::VectorXd alpha;  // row-major

    double at(int x, int y) const { return alpha[static_cast<Eigen::Index>(y) * width + x]; }
};

struct LbdmConfig {
    double rho_minus = 0.8;   // in (0, 1)
    double rho_plus = 1.2;    // in (1, 2]
    double tau = 0.85;        // in [0.5, 1]
    double lambda = 1e-2;     // ridge shrinkage, > 0
    double c = 800.0;         // label fidelity penalty
    int window = 1;           // half-width: 1 -> 3x3 (m=8), 3 -> 7x7 (m=48)
    double cg_tol = 1e-6;
    int cg_max_iters = 10000;
};

/// A = (I - F)(I - F)' + C and b = C * alpha_hat.
struct SparseSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
};

/// Object = contracted box, background = complement of the expanded box.
ScribbleMask make_scribble(const BoundingBox& bbox_local, int width, int height,
                           double rho_minus, double rho_plus);

/// Ridge-regression coefficients f = (X X' + lambda I)^-1 X x' for one
/// pixel's neighbourhood (X is m x (d+1) with appended ones).
Eigen::VectorXd local_coefficients(const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi,
                                   double lambda);

SparseSystem assemble_system(const Image& crop, const ScribbleMask& scribble,
                             const LbdmConfig& config);

/// Jacobi-preconditioned conjugate gradient from the zero vector.
AlphaMatte solve_alpha(const SparseSystem& system, int width, int height,
                       const LbdmConfig& config);

/// Threshold at the largest matte value that still classifies a tau
/// proportion of the box as object (strict >).
BinaryMask threshold_alpha(const AlphaMatte& matte, const BoundingBox& bbox_local, double tau);

BinaryMask lbdm_segment(const Image& frame, const BoundingBox& bbox, const LbdmConfig& config);

/// The matte for a frame/bbox pair, in crop coordinates (for debug output).
AlphaMatte lbdm_matte(const Image& frame, const BoundingBox& bbox, const LbdmConfig& config,
                      CroppedScene* scene_out = nullptr);

}  // namespace bbinit
