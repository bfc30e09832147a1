#include "bbinit/lbdm.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>

#include "bbinit/errors.hpp"

namespace bbinit {

namespace {

void validate_config(const LbdmConfig& c) {
    if (!(c.rho_minus > 0 && c.rho_minus < 1)) throw InvalidInput("rho_minus must lie in (0, 1)");
    if (!(c.rho_plus > 1 && c.rho_plus <= 2)) throw InvalidInput("rho_plus must lie in (1, 2]");
    if (!(c.tau >= 0.5 && c.tau <= 1)) throw InvalidInput("tau must lie in [0.5, 1]");
    if (!(c.lambda > 0)) throw InvalidInput("lambda must be positive");
    if (!(c.c > 0)) throw InvalidInput("c must be positive");
    if (c.window != 1 && c.window != 3) throw InvalidInput("window half-width must be 1 or 3");
}

}  // namespace

ScribbleMask make_scribble(const BoundingBox& bbox_local, int width, int height,
                           double rho_minus, double rho_plus) {
    if (!(rho_minus > 0 && rho_minus < 1)) throw InvalidInput("rho_minus must lie in (0, 1)");
    if (!(rho_plus > 1 && rho_plus <= 2)) throw InvalidInput("rho_plus must lie in (1, 2]");
    if (width < 1 || height < 1) throw InvalidInput("Extent must be positive");

    BoundingBox inner = scale_bbox_area(bbox_local, rho_minus);
    BoundingBox outer = scale_bbox_area(bbox_local, rho_plus);

    ScribbleMask mask;
    mask.width = width;
    mask.height = height;
    mask.labels.assign(static_cast<std::size_t>(width) * height, ScribbleLabel::Unknown);
    std::size_t n_object = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * width + x;
            if (inner.contains_pixel_centre(x, y)) {
                mask.labels[i] = ScribbleLabel::Object;
                ++n_object;
            } else if (!outer.contains_pixel_centre(x, y)) {
                mask.labels[i] = ScribbleLabel::Background;
            }
        }
    if (n_object == 0)
        throw DegenerateScribble("Contracted box rasterised to an empty object scribble");
    return mask;
}

Eigen::VectorXd local_coefficients(const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi,
                                   double lambda) {
    if (!(lambda > 0)) throw InvalidInput("lambda must be positive");
    const Eigen::Index m = Xi.rows();
    Eigen::MatrixXd G = Xi * Xi.transpose();
    G.diagonal().array() += lambda;
    return G.llt().solve(Xi * xi);
}

SparseSystem assemble_system(const Image& crop, const ScribbleMask& scribble,
                             const LbdmConfig& config) {
    if (crop.width != scribble.width || crop.height != scribble.height)
        throw InvalidInput("Crop and scribble extents differ");
    validate_config(config);

    const int W = crop.width, H = crop.height;
    const Eigen::Index n = static_cast<Eigen::Index>(crop.pixel_count());
    const int r = config.window;
    const int full_m = (2 * r + 1) * (2 * r + 1) - 1;

    // Pixel features: normalised RGB with an appended 1.
    Eigen::MatrixXd feat(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Rgb& p = crop.pixels[static_cast<std::size_t>(i)];
        feat.row(i) << p.r / 255.0, p.g / 255.0, p.b / 255.0, 1.0;
    }

    // I - F, assembled column by column.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * (full_m + 1));
    Eigen::MatrixXd Xi(full_m, 4);
    std::vector<Eigen::Index> neighbours(full_m);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            Eigen::Index i = static_cast<Eigen::Index>(y) * W + x;
            int m = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (!crop.in_bounds(nx, ny)) continue;  // truncated window at borders
                    Eigen::Index j = static_cast<Eigen::Index>(ny) * W + nx;
                    Xi.row(m) = feat.row(j);
                    neighbours[m] = j;
                    ++m;
                }
            triplets.emplace_back(i, i, 1.0);
            if (m == 0) continue;
            Eigen::VectorXd f =
                local_coefficients(Xi.topRows(m), feat.row(i).transpose(), config.lambda);
            for (int k = 0; k < m; ++k) triplets.emplace_back(neighbours[k], i, -f[k]);
        }
    }
    Eigen::SparseMatrix<double> M(n, n);  // I - F
    M.setFromTriplets(triplets.begin(), triplets.end());

    SparseSystem system;
    system.matrix = M * Eigen::SparseMatrix<double>(M.transpose());
    system.rhs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ScribbleLabel lab = scribble.labels[static_cast<std::size_t>(i)];
        if (lab == ScribbleLabel::Unknown) continue;
        system.matrix.coeffRef(i, i) += config.c;
        if (lab == ScribbleLabel::Object) system.rhs[i] = config.c;
    }
    system.matrix.makeCompressed();
    return system;
}

AlphaMatte solve_alpha(const SparseSystem& system, int width, int height,
                       const LbdmConfig& config) {
    const Eigen::Index n = system.matrix.rows();
    if (n != static_cast<Eigen::Index>(width) * height)
        throw InvalidInput("System size does not match the extent");

    AlphaMatte matte;
    matte.width = width;
    matte.height = height;
    if (system.rhs.norm() == 0.0) {
        matte.alpha = Eigen::VectorXd::Zero(n);
        return matte;
    }

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(config.cg_tol);
    cg.setMaxIterations(config.cg_max_iters);
    cg.compute(system.matrix);
    matte.alpha = cg.solve(system.rhs);  // zero start vector
    if (cg.info() != Eigen::Success)
        throw ConvergenceError("Conjugate gradient hit its iteration cap", cg.error());
    return matte;
}

BinaryMask threshold_alpha(const AlphaMatte& matte, const BoundingBox& bbox_local, double tau) {
    if (!(tau >= 0.5 && tau <= 1)) throw InvalidInput("tau must lie in [0.5, 1]");

    std::vector<double> values;
    for (int y = 0; y < matte.height; ++y)
        for (int x = 0; x < matte.width; ++x)
            if (bbox_local.contains_pixel_centre(x, y)) values.push_back(matte.at(x, y));
    if (values.empty()) throw InvalidInput("Bounding box contains no pixel centres");

    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const std::size_t needed = static_cast<std::size_t>(std::ceil(tau * n));

    // t = largest matte value leaving at least ceil(tau*n) box pixels
    // strictly above it; with none available, everything is object.
    double t;
    if (needed >= n) {
        t = values.front() - 1.0;
    } else {
        std::size_t p = n - needed;  // values[p..] must stay above t
        double cut = values[p];
        std::size_t j = p;
        while (j > 0 && values[j - 1] == cut) --j;
        t = j > 0 ? values[j - 1] : values.back();  // all-equal: empty mask
    }

    BinaryMask mask(matte.width, matte.height);
    for (Eigen::Index i = 0; i < matte.alpha.size(); ++i)
        if (matte.alpha[i] > t) mask.labels[static_cast<std::size_t>(i)] = 1;
    return mask;
}

AlphaMatte lbdm_matte(const Image& frame, const BoundingBox& bbox, const LbdmConfig& config,
                      CroppedScene* scene_out) {
    validate_config(config);
    CroppedScene scene = crop_context(frame, bbox);
    ScribbleMask scribble = make_scribble(scene.bbox_local, scene.crop.width, scene.crop.height,
                                          config.rho_minus, config.rho_plus);
    SparseSystem system = assemble_system(scene.crop, scribble, config);
    AlphaMatte matte = solve_alpha(system, scene.crop.width, scene.crop.height, config);
    if (scene_out) *scene_out = std::move(scene);
    return matte;
}

BinaryMask lbdm_segment(const Image& frame, const BoundingBox& bbox, const LbdmConfig& config) {
    CroppedScene scene;
    AlphaMatte matte = lbdm_matte(frame, bbox, config, &scene);
    BinaryMask mask = threshold_alpha(matte, scene.bbox_local, config.tau);
    mask.dx = scene.x0;
    mask.dy = scene.y0;
    return embed_in_frame(mask, frame.width, frame.height);
}

}  // namespace bbinit
