#include "bbinit/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "bbinit/errors.hpp"

namespace bbinit {

namespace {

constexpr int kSiftDims = 384;   // 4*4*8 per channel, 3 channels
constexpr int kLbpDims = 30;     // 10 riu2 codes per channel
constexpr int kLbpP = 8;
constexpr double kLbpR = 2.0;

double channel_value(const Image& img, int x, int y, int c) {
    const Rgb& p = img.at(x, y);
    return c == 0 ? p.r : (c == 1 ? p.g : p.b);
}

double channel_clamped(const Image& img, int x, int y, int c) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return channel_value(img, x, y, c);
}

double bilinear_clamped(const Image& img, double x, double y, int c) {
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    double fx = x - x0, fy = y - y0;
    double v00 = channel_clamped(img, x0, y0, c), v10 = channel_clamped(img, x0 + 1, y0, c);
    double v01 = channel_clamped(img, x0, y0 + 1, c), v11 = channel_clamped(img, x0 + 1, y0 + 1, c);
    return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) +
           v01 * (1 - fx) * fy + v11 * fx * fy;
}

int riu2_code(const Image& img, int cx, int cy, int c) {
    double centre = channel_clamped(img, cx, cy, c);
    std::array<int, kLbpP> bits{};
    for (int p = 0; p < kLbpP; ++p) {
        double angle = 2.0 * std::numbers::pi * p / kLbpP;
        double nx = cx + kLbpR * std::cos(angle);
        double ny = cy - kLbpR * std::sin(angle);
        bits[p] = bilinear_clamped(img, nx, ny, c) >= centre ? 1 : 0;
    }
    int transitions = 0, set = 0;
    for (int p = 0; p < kLbpP; ++p) {
        transitions += bits[p] != bits[(p + 1) % kLbpP];
        set += bits[p];
    }
    return transitions <= 2 ? set : kLbpP + 1;
}

}  // namespace

int feature_dimension(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::RgbHist:
        case FeatureKind::LabHist:
            return 512;
        case FeatureKind::Sift:
            return kSiftDims;
        case FeatureKind::Lbp:
            return kLbpDims;
    }
    throw InvalidInput("Unknown feature kind");
}

FeatureKind feature_kind_from_string(const std::string& name) {
    if (name == "rgb") return FeatureKind::RgbHist;
    if (name == "lab") return FeatureKind::LabHist;
    if (name == "sift") return FeatureKind::Sift;
    if (name == "lbp") return FeatureKind::Lbp;
    throw InvalidInput("Unknown feature kind: " + name);
}

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::RgbHist: return "rgb";
        case FeatureKind::LabHist: return "lab";
        case FeatureKind::Sift: return "sift";
        case FeatureKind::Lbp: return "lbp";
    }
    return "?";
}

std::array<double, 3> srgb_to_lab(const Rgb& rgb) {
    auto linearise = [](double c) {
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    double r = linearise(rgb.r / 255.0);
    double g = linearise(rgb.g / 255.0);
    double b = linearise(rgb.b / 255.0);

    // sRGB -> XYZ (D65), normalised by the white point.
    double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
    double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;

    auto f = [](double t) {
        constexpr double eps = 216.0 / 24389.0, kappa = 24389.0 / 27.0;
        return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
    };
    double fx = f(x), fy = f(y), fz = f(z);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

FeatureVector colour_histogram(const Image& crop, const std::vector<int>& pixel_indices,
                               FeatureKind space, int bins_per_channel) {
    if (space != FeatureKind::RgbHist && space != FeatureKind::LabHist)
        throw InvalidInput("colour_histogram expects an rgb or lab kind");
    if (pixel_indices.empty()) throw InvalidInput("Histogram over an empty pixel set");
    if (bins_per_channel < 1) throw InvalidInput("bins_per_channel must be positive");

    const int nb = bins_per_channel;
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(nb * nb * nb);
    auto bin_of = [nb](double v, double lo, double hi) {
        int b = static_cast<int>((v - lo) / (hi - lo) * nb);
        return std::clamp(b, 0, nb - 1);
    };
    for (int idx : pixel_indices) {
        if (idx < 0 || idx >= static_cast<int>(crop.pixel_count()))
            throw InvalidInput("Pixel index out of range");
        const Rgb& p = crop.pixels[idx];
        int b0, b1, b2;
        if (space == FeatureKind::RgbHist) {
            b0 = p.r * nb / 256;
            b1 = p.g * nb / 256;
            b2 = p.b * nb / 256;
        } else {
            auto [L, a, b] = srgb_to_lab(p);
            b0 = bin_of(L, 0.0, 100.0);
            b1 = bin_of(a, -110.0, 110.0);
            b2 = bin_of(b, -110.0, 110.0);
        }
        hist[(b0 * nb + b1) * nb + b2] += 1.0;
    }
    hist /= static_cast<double>(pixel_indices.size());
    return {hist, space};
}

FeatureVector dense_sift_at(const Image& crop, int cx, int cy) {
    if (!crop.in_bounds(cx, cy)) throw InvalidInput("SIFT centre outside the crop");

    constexpr int kPatch = 16, kCell = 4, kGrid = 4, kOri = 8;
    Eigen::VectorXd desc = Eigen::VectorXd::Zero(kSiftDims);

    for (int c = 0; c < 3; ++c) {
        std::array<double, kGrid * kGrid * kOri> block{};
        for (int iy = 0; iy < kPatch; ++iy) {
            for (int ix = 0; ix < kPatch; ++ix) {
                int px = cx - kPatch / 2 + ix;
                int py = cy - kPatch / 2 + iy;
                if (!crop.in_bounds(px, py)) continue;  // zero gradient outside
                double gx = (channel_clamped(crop, px + 1, py, c) -
                             channel_clamped(crop, px - 1, py, c)) / 2.0;
                double gy = (channel_clamped(crop, px, py + 1, c) -
                             channel_clamped(crop, px, py - 1, c)) / 2.0;
                double mag = std::hypot(gx, gy);
                if (mag <= 0) continue;
                double theta = std::atan2(gy, gx);
                if (theta < 0) theta += 2.0 * std::numbers::pi;
                double ob = theta * kOri / (2.0 * std::numbers::pi);
                double bu = (ix + 0.5) / kCell - 0.5;
                double bv = (iy + 0.5) / kCell - 0.5;
                int u0 = static_cast<int>(std::floor(bu));
                int v0 = static_cast<int>(std::floor(bv));
                int o0 = static_cast<int>(std::floor(ob)) % kOri;
                double fu = bu - std::floor(bu), fv = bv - std::floor(bv), fo = ob - std::floor(ob);
                for (int du = 0; du < 2; ++du) {
                    int u = u0 + du;
                    if (u < 0 || u >= kGrid) continue;
                    for (int dv = 0; dv < 2; ++dv) {
                        int v = v0 + dv;
                        if (v < 0 || v >= kGrid) continue;
                        for (int dw = 0; dw < 2; ++dw) {
                            int o = (o0 + dw) % kOri;
                            double w = (du ? fu : 1 - fu) * (dv ? fv : 1 - fv) * (dw ? fo : 1 - fo);
                            block[(v * kGrid + u) * kOri + o] += w * mag;
                        }
                    }
                }
            }
        }
        Eigen::Map<Eigen::VectorXd> vec(block.data(), block.size());
        double n = vec.norm();
        if (n > 0) {
            vec /= n;
            vec = vec.cwiseMin(0.2);
            n = vec.norm();
            if (n > 0) vec /= n;
        }
        desc.segment(c * kGrid * kGrid * kOri, kGrid * kGrid * kOri) = vec;
    }
    return {desc, FeatureKind::Sift};
}

FeatureVector lbp_at(const Image& crop, int cx, int cy) {
    if (!crop.in_bounds(cx, cy)) throw InvalidInput("LBP centre outside the crop");

    constexpr int kCodes = kLbpP + 2;  // 0..P set-bit counts plus non-uniform
    Eigen::VectorXd desc = Eigen::VectorXd::Zero(kLbpDims);
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd hist = Eigen::VectorXd::Zero(kCodes);
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
                int x = std::clamp(cx + dx, 0, crop.width - 1);
                int y = std::clamp(cy + dy, 0, crop.height - 1);
                hist[riu2_code(crop, x, y, c)] += 1.0;
            }
        hist /= 25.0;
        desc.segment(c * kCodes, kCodes) = hist;
    }
    return {desc, FeatureKind::Lbp};
}

std::pair<Eigen::MatrixXd, StandardizationStats> standardize(const Eigen::MatrixXd& features) {
    if (features.rows() < 2) throw InvalidInput("standardize requires at least 2 rows");
    StandardizationStats stats;
    stats.mean = features.colwise().mean();
    Eigen::MatrixXd centred = features.rowwise() - stats.mean.transpose();
    stats.stddev = (centred.array().square().colwise().mean()).sqrt();
    return {apply_standardization(features, stats), stats};
}

Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& features,
                                      const StandardizationStats& stats) {
    if (features.cols() != stats.mean.size())
        throw InvalidInput("Feature dimension does not match standardization stats");
    Eigen::MatrixXd out = features.rowwise() - stats.mean.transpose();
    for (Eigen::Index d = 0; d < stats.stddev.size(); ++d) {
        if (stats.stddev[d] < 1e-12)
            out.col(d).setZero();
        else
            out.col(d) /= stats.stddev[d];
    }
    return out;
}

}  // namespace bbinit
