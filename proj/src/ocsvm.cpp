#include "bbinit/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bbinit/errors.hpp"
#include "bbinit/superpixel.hpp"

namespace bbinit {

double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma) {
    if (x.size() != y.size()) throw InvalidInput("Kernel argument dimensions differ");
    if (!(gamma > 0)) throw InvalidInput("gamma must be positive");
    return std::exp(-gamma * (x - y).squaredNorm());
}

OcsvmModel train_ocsvm(const Eigen::MatrixXd& X, double nu, double gamma,
                       const OcsvmTrainOptions& opts) {
    const Eigen::Index N = X.rows();
    if (N < 2) throw InvalidInput("Training requires at least 2 points");
    if (!(nu > 0 && nu < 1)) throw InvalidInput("nu must lie in (0, 1)");
    if (!(gamma > 0)) throw InvalidInput("gamma must be positive");

    const double C = 1.0 / (nu * static_cast<double>(N));

    // Full Gram matrix; the background superpixel counts this sees keep it
    // small.
    Eigen::MatrixXd K(N, N);
    Eigen::VectorXd sqnorm = X.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < N; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < N; ++j) {
            double d2 = sqnorm[i] + sqnorm[j] - 2.0 * X.row(i).dot(X.row(j));
            double k = std::exp(-gamma * std::max(0.0, d2));
            K(i, j) = k;
            K(j, i) = k;
        }
    }

    // Feasible start: the first floor(nu*N) points at the upper bound, the
    // next takes the remainder.
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(N);
    Eigen::Index n_full = static_cast<Eigen::Index>(nu * static_cast<double>(N));
    double remaining = 1.0;
    for (Eigen::Index i = 0; i < n_full && i < N; ++i) {
        alpha[i] = C;
        remaining -= C;
    }
    if (remaining > 0 && n_full < N) alpha[n_full] = remaining;

    Eigen::VectorXd G = K * alpha;  // gradient of 1/2 a'Ka

    const double bound_eps = 1e-12;
    double violation = 0.0;
    long long iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        // Maximal violating pair: i can grow (alpha_i < C), j can shrink.
        Eigen::Index i = -1, j = -1;
        double gmin = std::numeric_limits<double>::infinity();
        double gmax = -std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < N; ++t) {
            if (alpha[t] < C - bound_eps && G[t] < gmin) {
                gmin = G[t];
                i = t;
            }
            if (alpha[t] > bound_eps && G[t] > gmax) {
                gmax = G[t];
                j = t;
            }
        }
        violation = gmax - gmin;
        if (i < 0 || j < 0 || violation <= opts.tol) break;

        double denom = K(i, i) + K(j, j) - 2.0 * K(i, j);
        double step = violation / std::max(denom, 1e-12);
        step = std::min({step, C - alpha[i], alpha[j]});
        alpha[i] += step;
        alpha[j] -= step;
        G += step * (K.col(i) - K.col(j));
    }
    if (iter >= opts.max_iters)
        throw ConvergenceError("SMO failed to reach KKT tolerance", violation);

    // rho from free support vectors; fall back to the midpoint of the
    // bound-SV decision extremes.
    double rho_sum = 0.0;
    int n_free = 0;
    double lb = -std::numeric_limits<double>::infinity();
    double ub = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < N; ++t) {
        if (alpha[t] > bound_eps && alpha[t] < C - bound_eps) {
            rho_sum += G[t];
            ++n_free;
        } else if (alpha[t] >= C - bound_eps) {
            lb = std::max(lb, G[t]);
        } else {
            ub = std::min(ub, G[t]);
        }
    }
    double rho;
    if (n_free > 0) {
        rho = rho_sum / n_free;
    } else {
        if (!std::isfinite(lb)) lb = ub;
        if (!std::isfinite(ub)) ub = lb;
        rho = (lb + ub) / 2.0;
    }

    OcsvmModel model;
    model.params.gamma = gamma;
    model.nu = nu;
    model.rho = rho;
    std::vector<Eigen::Index> sv;
    for (Eigen::Index t = 0; t < N; ++t)
        if (alpha[t] > bound_eps) sv.push_back(t);
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.alphas.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t s = 0; s < sv.size(); ++s) {
        model.support_vectors.row(static_cast<Eigen::Index>(s)) = X.row(sv[s]);
        model.alphas[static_cast<Eigen::Index>(s)] = alpha[sv[s]];
    }
    return model;
}

std::pair<double, bool> decide(const OcsvmModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.support_vectors.cols())
        throw InvalidInput("Feature dimension does not match the model");
    double score = -model.rho;
    for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s)
        score += model.alphas[s] *
                 std::exp(-model.params.gamma * (model.support_vectors.row(s).transpose() - x).squaredNorm());
    // The tiny slack keeps exact-tie scores (identical training data) from
    // flipping sign through floating-point rounding.
    return {score, score >= -1e-9};
}

namespace {

Eigen::MatrixXd extract_features(const Image& crop, const SuperpixelMap& spmap,
                                 FeatureKind kind) {
    auto lists = spmap.pixel_lists();
    Eigen::MatrixXd F(spmap.n_superpixels, feature_dimension(kind));
    for (int j = 0; j < spmap.n_superpixels; ++j) {
        if (kind == FeatureKind::RgbHist || kind == FeatureKind::LabHist) {
            F.row(j) = colour_histogram(crop, lists[j], kind).values;
        } else {
            // Descriptor at the pixel nearest the superpixel centroid.
            double sx = 0, sy = 0;
            for (int p : lists[j]) {
                sx += p % crop.width;
                sy += p / crop.width;
            }
            int cx = std::clamp(static_cast<int>(std::lround(sx / lists[j].size())), 0, crop.width - 1);
            int cy = std::clamp(static_cast<int>(std::lround(sy / lists[j].size())), 0, crop.height - 1);
            F.row(j) = kind == FeatureKind::Sift ? dense_sift_at(crop, cx, cy).values
                                                 : lbp_at(crop, cx, cy).values;
        }
    }
    return F;
}

}  // namespace

BinaryMask ocsvm_segment(const Image& frame, const BoundingBox& bbox, const OcsvmConfig& config) {
    CroppedScene scene = crop_context(frame, bbox);
    SuperpixelMap spmap = slic0_segment(
        scene.crop, target_superpixel_count(scene.crop.pixel_count()), config.slic_max_iters);
    BBoxPartition part = partition_by_bbox(spmap, scene.bbox_local);
    if (part.background_ids.size() < 2)
        throw InsufficientBackground("Fewer than 2 background superpixels");

    Eigen::MatrixXd all = extract_features(scene.crop, spmap, config.feature);
    Eigen::MatrixXd train(static_cast<Eigen::Index>(part.background_ids.size()), all.cols());
    Eigen::Index r = 0;
    for (int id : part.background_ids) train.row(r++) = all.row(id);

    auto [train_std, stats] = standardize(train);
    OcsvmModel model = train_ocsvm(train_std, config.nu, config.gamma, config.train);
    model.stats = stats;

    std::set<int> object_ids;
    for (int id : part.unknown_ids) {
        Eigen::VectorXd x =
            apply_standardization(all.row(id), stats).row(0).transpose();
        if (!decide(model, x).second) object_ids.insert(id);
    }

    BinaryMask mask = mask_from_superpixels(spmap, object_ids);
    mask.dx = scene.x0;
    mask.dy = scene.y0;
    return embed_in_frame(mask, frame.width, frame.height);
}

}  // namespace bbinit
