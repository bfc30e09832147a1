#include <doctest.h>

#include <random>

#include "bbinit/errors.hpp"
#include "bbinit/eval.hpp"
#include "bbinit/lbdm.hpp"
#include "synthetic.hpp"

using namespace bbinit;
using namespace bbinit::testutil;

namespace {

Image random_crop(int w, int h, std::uint32_t seed) {
    Image img(w, h);
    std::mt19937 rng(seed);
    for (Rgb& p : img.pixels)
        p = {static_cast<std::uint8_t>(rng() & 0xff), static_cast<std::uint8_t>(rng() & 0xff),
             static_cast<std::uint8_t>(rng() & 0xff)};
    return img;
}

ScribbleMask centre_scribble(int w, int h) {
    BoundingBox box{w / 4.0, h / 4.0, w / 2.0, h / 2.0};
    return make_scribble(box, w, h, 0.5, 1.8);
}

Eigen::VectorXd dense_solve(const SparseSystem& sys) {
    Eigen::MatrixXd A = Eigen::MatrixXd(sys.matrix);
    return A.ldlt().solve(sys.rhs);
}

}  // namespace

TEST_SUITE("lbdm") {

TEST_CASE("make_scribble rejects bad factors and degenerate inner boxes") {
    CHECK_THROWS_AS(make_scribble({10, 10, 20, 20}, 60, 60, 0.25, 4.0), InvalidInput);
    CHECK_THROWS_AS(make_scribble({10, 10, 20, 20}, 60, 60, 1.5, 1.2), InvalidInput);
    // Inner box shrinks below one pixel centre.
    CHECK_THROWS_AS(make_scribble({9.5, 9.5, 1.0, 1.0}, 60, 60, 0.1, 1.2),
                    DegenerateScribble);
}

TEST_CASE("make_scribble label counts match brute-force membership") {
    BoundingBox box{20, 20, 20, 20};
    double rm = 0.81, rp = 1.21;
    ScribbleMask s = make_scribble(box, 80, 80, rm, rp);

    BoundingBox inner = scale_bbox_area(box, rm);
    BoundingBox outer = scale_bbox_area(box, rp);
    CHECK(inner.w == doctest::Approx(18.0));
    CHECK(outer.w == doctest::Approx(22.0));

    int counts[3] = {0, 0, 0};
    for (int y = 0; y < 80; ++y)
        for (int x = 0; x < 80; ++x) {
            ScribbleLabel expect = inner.contains_pixel_centre(x, y) ? ScribbleLabel::Object
                                   : outer.contains_pixel_centre(x, y)
                                       ? ScribbleLabel::Unknown
                                       : ScribbleLabel::Background;
            CHECK(s.at(x, y) == expect);
            ++counts[static_cast<int>(expect)];
        }
    CHECK(counts[2] == 18 * 18);
    CHECK(counts[1] == 22 * 22 - 18 * 18);
    CHECK(counts[0] == 80 * 80 - 22 * 22);
}

TEST_CASE("local_coefficients reproduces constants and shrinks with lambda") {
    Eigen::MatrixXd Xi(8, 4);
    Eigen::VectorXd xi(4);
    xi << 0.3, 0.5, 0.7, 1.0;
    for (int i = 0; i < 8; ++i) Xi.row(i) = xi.transpose();
    Eigen::VectorXd f = local_coefficients(Xi, xi, 1e-7);
    CHECK(f.sum() == doctest::Approx(1.0).epsilon(1e-3));

    Eigen::VectorXd f_huge = local_coefficients(Xi, xi, 1e12);
    CHECK(f_huge.cwiseAbs().maxCoeff() < 1e-9);
    CHECK_THROWS_AS(local_coefficients(Xi, xi, 0.0), InvalidInput);
}

TEST_CASE("local_coefficients matches the explicit inverse formula") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd Xi(8, 4);
    Eigen::VectorXd xi(4);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) Xi(i, j) = u(rng);
    for (int j = 0; j < 4; ++j) xi[j] = u(rng);
    double lambda = 0.01;

    Eigen::MatrixXd G = Xi * Xi.transpose() + lambda * Eigen::MatrixXd::Identity(8, 8);
    Eigen::VectorXd expect = G.inverse() * Xi * xi;
    Eigen::VectorXd got = local_coefficients(Xi, xi, lambda);
    CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("assemble_system matches a hand-assembled dense system") {
    Image crop = random_crop(5, 5, 77);
    ScribbleMask scribble;
    scribble.width = 5;
    scribble.height = 5;
    scribble.labels.assign(25, ScribbleLabel::Background);
    scribble.labels[12] = ScribbleLabel::Unknown;
    scribble.labels[6] = ScribbleLabel::Object;
    LbdmConfig cfg;

    SparseSystem sys = assemble_system(crop, scribble, cfg);

    // Independent dense assembly from the definition.
    Eigen::MatrixXd feat(25, 4);
    for (int i = 0; i < 25; ++i)
        feat.row(i) << crop.pixels[i].r / 255.0, crop.pixels[i].g / 255.0,
            crop.pixels[i].b / 255.0, 1.0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(25, 25);  // I - F
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
            std::vector<int> nbr;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    if (x + dx < 0 || x + dx >= 5 || y + dy < 0 || y + dy >= 5) continue;
                    nbr.push_back((y + dy) * 5 + x + dx);
                }
            Eigen::MatrixXd Xi(nbr.size(), 4);
            for (std::size_t k = 0; k < nbr.size(); ++k) Xi.row(k) = feat.row(nbr[k]);
            Eigen::VectorXd f =
                local_coefficients(Xi, feat.row(y * 5 + x).transpose(), cfg.lambda);
            for (std::size_t k = 0; k < nbr.size(); ++k) M(nbr[k], y * 5 + x) -= f[k];
        }
    Eigen::MatrixXd A = M * M.transpose();
    for (int i = 0; i < 25; ++i)
        if (scribble.labels[i] != ScribbleLabel::Unknown) A(i, i) += cfg.c;

    CHECK((Eigen::MatrixXd(sys.matrix) - A).cwiseAbs().maxCoeff() < 1e-10);
    for (int i = 0; i < 25; ++i)
        CHECK(sys.rhs[i] == doctest::Approx(i == 6 ? cfg.c : 0.0));
}

TEST_CASE("the assembled matrix is symmetric and positive semidefinite") {
    Image crop = random_crop(10, 10, 31);
    ScribbleMask scribble = centre_scribble(10, 10);
    LbdmConfig cfg;
    SparseSystem sys = assemble_system(crop, scribble, cfg);

    Eigen::MatrixXd A = Eigen::MatrixXd(sys.matrix);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-10);

    std::mt19937 rng(4);
    std::normal_distribution<double> gauss;
    for (int probe = 0; probe < 20; ++probe) {
        Eigen::VectorXd v(A.rows());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
        CHECK(v.dot(A * v) >= -1e-8);
    }
}

TEST_CASE("a fully-background scene solves to the zero matte") {
    Image crop = random_crop(3, 3, 5);
    ScribbleMask scribble;
    scribble.width = 3;
    scribble.height = 3;
    scribble.labels.assign(9, ScribbleLabel::Background);
    LbdmConfig cfg;
    SparseSystem sys = assemble_system(crop, scribble, cfg);
    CHECK(sys.rhs.norm() == 0.0);
    AlphaMatte matte = solve_alpha(sys, 3, 3, cfg);
    CHECK(matte.alpha.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conjugate gradient matches a dense direct solve on small crops") {
    for (std::uint32_t seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
        int w = 6 + static_cast<int>(seed % 7), h = 6 + static_cast<int>((seed * 3) % 7);
        Image crop = random_crop(w, h, seed);
        ScribbleMask scribble = centre_scribble(w, h);
        LbdmConfig cfg;
        cfg.cg_tol = 1e-10;
        SparseSystem sys = assemble_system(crop, scribble, cfg);
        AlphaMatte matte = solve_alpha(sys, w, h, cfg);

        Eigen::VectorXd expect = dense_solve(sys);
        CHECK((matte.alpha - expect).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((sys.matrix * matte.alpha - sys.rhs).norm() <= cfg.cg_tol * sys.rhs.norm() * 10);
    }
}

TEST_CASE("labeled pixels keep their scribble value to within 0.01") {
    for (std::uint32_t seed : {11u, 12u, 13u}) {
        Image crop = random_crop(12, 12, seed);
        ScribbleMask scribble = centre_scribble(12, 12);
        LbdmConfig cfg;
        SparseSystem sys = assemble_system(crop, scribble, cfg);
        AlphaMatte matte = solve_alpha(sys, 12, 12, cfg);
        for (int i = 0; i < 144; ++i) {
            if (scribble.labels[i] == ScribbleLabel::Unknown) continue;
            double target = scribble.labels[i] == ScribbleLabel::Object ? 1.0 : 0.0;
            CHECK(std::abs(matte.alpha[i] - target) <= 0.01);
        }
    }
}

TEST_CASE("solve_alpha reports non-convergence") {
    Image crop = random_crop(8, 8, 21);
    ScribbleMask scribble = centre_scribble(8, 8);
    LbdmConfig cfg;
    cfg.cg_tol = 1e-14;
    cfg.cg_max_iters = 1;
    SparseSystem sys = assemble_system(crop, scribble, cfg);
    CHECK_THROWS_AS(solve_alpha(sys, 8, 8, cfg), ConvergenceError);
}

TEST_CASE("threshold_alpha boundary semantics") {
    AlphaMatte constant;
    constant.width = 10;
    constant.height = 10;
    constant.alpha = Eigen::VectorXd::Constant(100, 0.5);
    BoundingBox box{2, 2, 6, 6};
    BinaryMask empty = threshold_alpha(constant, box, 0.7);
    CHECK(empty.count_ones() == 0);
    CHECK_THROWS_AS(threshold_alpha(constant, box, 0.3), InvalidInput);
    CHECK_THROWS_AS(threshold_alpha(constant, {50, 50, 5, 5}, 0.7), InvalidInput);
}

TEST_CASE("threshold_alpha recovers an inner plateau covering 60% of the box") {
    // 10x10 box; inner 6x10 region at value 1, rest 0.
    AlphaMatte matte;
    matte.width = 12;
    matte.height = 12;
    matte.alpha = Eigen::VectorXd::Zero(144);
    for (int y = 1; y <= 10; ++y)
        for (int x = 1; x <= 6; ++x) matte.alpha[y * 12 + x] = 1.0;
    BoundingBox box{1, 1, 10, 10};
    BinaryMask m = threshold_alpha(matte, box, 0.5);
    CHECK(m.count_ones() == 60);
    for (int y = 1; y <= 10; ++y)
        for (int x = 1; x <= 6; ++x) CHECK(m.at(x, y) == 1);
}

TEST_CASE("threshold_alpha hits the tau fraction on tie-free mattes") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AlphaMatte matte;
    matte.width = 20;
    matte.height = 20;
    matte.alpha = Eigen::VectorXd::Zero(400);
    for (int i = 0; i < 400; ++i) matte.alpha[i] = u(rng);
    BoundingBox box{3, 3, 14, 14};
    double n_box = 14 * 14;
    for (double tau : {0.5, 0.6, 0.75, 0.9, 1.0}) {
        BinaryMask m = threshold_alpha(matte, box, tau);
        int inside = 0;
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x)
                if (box.contains_pixel_centre(x, y) && m.at(x, y)) ++inside;
        CHECK(inside / n_box >= tau - 2.0 / n_box);
        CHECK(inside / n_box <= tau + 2.0 / n_box);
    }
}

TEST_CASE("segmentation recovers the synthetic square cleanly") {
    SyntheticScene s = make_square_scene(120, 40);
    LbdmConfig cfg;  // rho_minus 0.8, rho_plus 1.2, tau 0.85, lambda 1e-2
    BinaryMask pred = lbdm_segment(s.frame, s.bbox, cfg);
    CHECK(iou(s.ground_truth, pred) >= 0.95);
}

TEST_CASE("matte output reports the crop geometry") {
    SyntheticScene s = make_square_scene(100, 30);
    LbdmConfig cfg;
    CroppedScene scene;
    AlphaMatte matte = lbdm_matte(s.frame, s.bbox, cfg, &scene);
    CHECK(matte.width == scene.crop.width);
    CHECK(matte.height == scene.crop.height);
    CHECK(matte.alpha.allFinite());
}

}  // TEST_SUITE
