#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "bbinit/core.hpp"

namespace bbinit {

enum class FeatureKind { RgbHist, LabHist, Sift, Lbp };

/// Fixed descriptor length per kind: joint 8^3 histograms, 3 x 128 SIFT,
/// 3 x 10 riu2 LBP.
int feature_dimension(FeatureKind kind);

FeatureKind feature_kind_from_string(const std::string& name);
std::string to_string(FeatureKind kind);

struct FeatureVector {
    Eigen::VectorXd values;
    FeatureKind kind = FeatureKind::RgbHist;
};

struct StandardizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
};

/// sRGB (D65) -> CIELAB. L in [0, 100].
std::array<double, 3> srgb_to_lab(const Rgb& rgb);

/// Joint per-channel histogram over the given pixels, L1-normalised.
/// RGB bins uniform over [0,256); LAB bins over L in [0,100], a,b in
/// [-110,110] with clamping.
FeatureVector colour_histogram(const Image& crop, const std::vector<int>& pixel_indices,
                               FeatureKind space, int bins_per_channel = 8);

/// 4x4 spatial bins of 4 px cells over a 16x16 patch, 8 orientation bins,
/// orientation fixed at 0; computed per colour channel and concatenated.
FeatureVector dense_sift_at(const Image& crop, int cx, int cy);

/// Histogram of riu2 LBP codes (P=8, R=2) over the 5x5 window centred at
/// (cx, cy), per colour channel, concatenated.
FeatureVector lbp_at(const Image& crop, int cx, int cy);

/// Per-dimension zero mean, unit population variance. Dimensions with
/// stddev < 1e-12 are left at zero after mean subtraction.
std::pair<Eigen::MatrixXd, StandardizationStats> standardize(const Eigen::MatrixXd& features);

/// Transform rows with previously computed stats (degenerate dims -> 0).
Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& features,
                                      const StandardizationStats& stats);

}  // namespace bbinit
