#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "bbinit/cv_driver.hpp"
#include "bbinit/errors.hpp"
#include "bbinit/eval.hpp"
#include "bbinit/image_io.hpp"
#include "bbinit/lbdm.hpp"

using nlohmann::json;
using namespace bbinit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct MethodFlags {
    std::string feature = "rgb";
    double nu = 0.3, gamma = 1.0;
    double delta = 0.5, eta = 0.8, radius = 20.0;
    double rho_minus = 0.8, rho_plus = 1.2, tau = 0.85, lambda = 1e-2, c = 800.0;
    int window = 1;
    double cg_tol = 1e-6;
    int cg_max_iters = 10000;
    int slic_max_iters = 10;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--feature", feature, "OC-SVM feature kind: rgb|lab|sift|lbp");
        cmd->add_option("--nu", nu, "OC-SVM regularisation in (0,1)");
        cmd->add_option("--gamma", gamma, "RBF kernel inverse squared length-scale");
        cmd->add_option("--delta", delta, "SBBM sampling fraction in (0,1]");
        cmd->add_option("--eta", eta, "SBBM match threshold in (0,1]");
        cmd->add_option("--radius", radius, "SBBM colour radius");
        cmd->add_option("--rho-minus", rho_minus, "LBDM object-scribble area shrink in (0,1)");
        cmd->add_option("--rho-plus", rho_plus, "LBDM background-scribble area expand in (1,2]");
        cmd->add_option("--tau", tau, "LBDM object proportion of the box in [0.5,1]");
        cmd->add_option("--lambda", lambda, "LBDM ridge shrinkage");
        cmd->add_option("--c", c, "LBDM label fidelity penalty");
        cmd->add_option("--window", window, "LBDM neighbourhood half-width (1 or 3)");
        cmd->add_option("--cg-tol", cg_tol, "LBDM CG relative residual tolerance");
        cmd->add_option("--cg-max-iters", cg_max_iters, "LBDM CG iteration cap");
        cmd->add_option("--slic-max-iters", slic_max_iters, "SLIC0 iteration count");
    }

    json params_for(Method method) const {
        switch (method) {
            case Method::Ocsvm:
                return {{"feature", feature}, {"nu", nu}, {"gamma", gamma},
                        {"slic_max_iters", slic_max_iters}};
            case Method::Sbbm:
                return {{"delta", delta}, {"eta", eta}, {"radius", radius},
                        {"slic_max_iters", slic_max_iters}};
            case Method::Lbdm:
                return {{"rho_minus", rho_minus}, {"rho_plus", rho_plus}, {"tau", tau},
                        {"lambda", lambda},       {"c", c},               {"window", window},
                        {"cg_tol", cg_tol},       {"cg_max_iters", cg_max_iters}};
            case Method::EntireBB:
                return json::object();
        }
        return json::object();
    }
};

BoundingBox region_from_flags(const std::string& region, const std::string& region_file) {
    std::string line = region;
    if (line.empty()) {
        std::ifstream in(region_file);
        if (!in) throw LoadError("Cannot open region file: " + region_file);
        std::getline(in, line);
    }
    return parse_region(line);
}

std::string default_cache_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    const char* env = std::getenv("BBINIT_CACHE");
    return env ? env : "";
}

int cmd_segment(const std::string& image_path, const std::string& region,
                const std::string& region_file, const std::string& method_name,
                const MethodFlags& flags, const std::string& out_path,
                const std::string& gt_mask_path, const std::string& matte_out,
                std::uint64_t seed) {
    Method method;
    json params;
    BoundingBox bbox;
    try {
        method = method_from_string(method_name);
        params = flags.params_for(method);
        validate_params(method, params);
        if (region.empty() == region_file.empty())
            throw InvalidInput("Exactly one of --region / --region-file is required");
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        bbox = region_from_flags(region, region_file);
        Image frame = read_png(image_path);
        BinaryMask pred = run_method(frame, bbox, method, params, seed);
        write_mask_png(out_path, pred);

        if (!matte_out.empty() && method == Method::Lbdm) {
            LbdmConfig cfg;
            cfg.rho_minus = flags.rho_minus;
            cfg.rho_plus = flags.rho_plus;
            cfg.tau = flags.tau;
            cfg.lambda = flags.lambda;
            cfg.c = flags.c;
            cfg.window = flags.window;
            cfg.cg_tol = flags.cg_tol;
            cfg.cg_max_iters = flags.cg_max_iters;
            AlphaMatte matte = lbdm_matte(frame, bbox, cfg);
            std::vector<std::uint16_t> gray(matte.alpha.size());
            for (Eigen::Index i = 0; i < matte.alpha.size(); ++i) {
                double a = std::clamp(matte.alpha[i], 0.0, 1.0);
                gray[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(a * 65535.0 + 0.5);
            }
            write_gray16_png(matte_out, matte.width, matte.height, gray);
        }

        if (!gt_mask_path.empty()) {
            BinaryMask gt = read_mask_png(gt_mask_path);
            BinaryMask B = rasterize_bbox(bbox, frame.width, frame.height);
            std::cout << std::fixed << std::setprecision(4)
                      << "phi_all " << iou(gt, pred) << "  phi_bb " << iou_bb(gt, pred, B)
                      << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_evaluate(const std::string& dataset_root, const std::string& method_name,
                 const MethodFlags& flags, const std::string& measure_name,
                 const std::string& out_path, std::uint64_t seed,
                 const std::string& cache_dir) {
    Method method;
    json params;
    try {
        method = method_from_string(method_name);
        measure_from_string(measure_name);
        params = flags.params_for(method);
        validate_params(method, params);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        Dataset dataset = load_dataset(dataset_root);
        ParamGrid grid;
        grid.method = method;
        grid.fixed = params;

        GridEvalOptions options;
        options.seed = seed;
        options.cache_dir = default_cache_dir(cache_dir);
        ScoreTable table = grid_evaluate(dataset, grid, options);

        double mean_all = 0.0, mean_bb = 0.0;
        std::cout << std::fixed << std::setprecision(4);
        for (std::size_t f = 0; f < table.frame_ids.size(); ++f) {
            std::cout << std::left << std::setw(32) << table.frame_ids[f] << " phi_all "
                      << table.phi_all[0][f] << "  phi_bb " << table.phi_bb[0][f];
            if (!table.errors[0][f].empty()) std::cout << "  [" << table.errors[0][f] << "]";
            std::cout << "\n";
            mean_all += table.phi_all[0][f];
            mean_bb += table.phi_bb[0][f];
        }
        mean_all /= static_cast<double>(table.frame_ids.size());
        mean_bb /= static_cast<double>(table.frame_ids.size());
        std::cout << "mean: phi_all " << mean_all << "  phi_bb " << mean_bb << "\n";

        if (!out_path.empty()) {
            json frames = json::array();
            for (std::size_t f = 0; f < table.frame_ids.size(); ++f) {
                json entry{{"frame", table.frame_ids[f]},
                           {"phi_all", table.phi_all[0][f]},
                           {"phi_bb", table.phi_bb[0][f]}};
                if (!table.errors[0][f].empty()) entry["error"] = table.errors[0][f];
                frames.push_back(std::move(entry));
            }
            json report{{"method", to_string(method)}, {"params", params},
                        {"frames", std::move(frames)}, {"mean_phi_all", mean_all},
                        {"mean_phi_bb", mean_bb}};
            std::ofstream out(out_path);
            if (!out) throw LoadError("Cannot write report: " + out_path);
            out << report.dump(2) << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_cv(const std::string& dataset_root, const std::string& grid_path,
           const std::string& method_name, const std::string& measure_name,
           int workers, std::uint64_t seed, const std::string& cache_dir,
           const std::string& out_path) {
    CvRunOptions options;
    try {
        options.measure = measure_from_string(measure_name);
        options.dataset_root = dataset_root;
        options.grid_path = grid_path;
        options.workers = workers;
        options.seed = seed;
        options.cache_dir = default_cache_dir(cache_dir);
        options.report_path = out_path;
        // Validates the grid (and, when given, its agreement with --method)
        // before any dataset work.
        ParamGrid grid = load_grid(grid_path);
        if (!method_name.empty() && method_from_string(method_name) != grid.method)
            throw InvalidInput("--method disagrees with the grid file's method");
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const LoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    try {
        CvRunResult result = run_cv(options);
        std::cout << result.summary;
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_render(const std::string& image_path, const std::string& mask_path,
               const std::string& out_path) {
    try {
        Image image = read_png(image_path);
        BinaryMask mask = read_mask_png(mask_path);
        if (mask.width != image.width || mask.height != image.height)
            throw InvalidInput("Image and mask extents differ");

        // Fixed overlay: 0.5-opacity red tint, yellow boundary.
        Image out = image;
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x) {
                if (!mask.at(x, y)) continue;
                bool boundary = (x > 0 && !mask.at(x - 1, y)) ||
                                (x + 1 < mask.width && !mask.at(x + 1, y)) ||
                                (y > 0 && !mask.at(x, y - 1)) ||
                                (y + 1 < mask.height && !mask.at(x, y + 1));
                if (boundary) {
                    out.at(x, y) = {255, 255, 0};
                } else {
                    const Rgb& p = image.at(x, y);
                    out.at(x, y) = {static_cast<std::uint8_t>((p.r + 255) / 2),
                                    static_cast<std::uint8_t>(p.g / 2),
                                    static_cast<std::uint8_t>(p.b / 2)};
                }
            }
        write_png(out_path, out);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounding-box object segmentation for tracker initialisation"};
    app.require_subcommand(1);

    std::string image_path, region, region_file, method_name, out_path, gt_mask_path;
    std::string dataset_root, grid_path, measure_name = "all", cache_dir, mask_path, matte_out;
    int workers = 1;
    std::uint64_t seed = 0;
    MethodFlags flags;

    CLI::App* segment = app.add_subcommand("segment", "Segment one image given a bounding box");
    segment->add_option("--image", image_path, "Input PNG")->required();
    segment->add_option("--region", region, "Region as x,y,w,h or 8-number polygon");
    segment->add_option("--region-file", region_file, "File whose first line is the region");
    segment->add_option("--method", method_name, "ocsvm|sbbm|lbdm|entire-bb")->required();
    segment->add_option("--out", out_path, "Output mask PNG")->required();
    segment->add_option("--gt-mask", gt_mask_path, "Ground-truth mask PNG; prints phi scores");
    segment->add_option("--matte-out", matte_out, "16-bit matte PNG (lbdm only)");
    segment->add_option("--seed", seed, "RNG seed");
    flags.add_to(segment);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Score one parameter set on a dataset");
    evaluate->add_option("--dataset", dataset_root, "Dataset root directory")->required();
    evaluate->add_option("--method", method_name, "ocsvm|sbbm|lbdm|entire-bb")->required();
    evaluate->add_option("--measure", measure_name, "all|bb");
    evaluate->add_option("--out", out_path, "JSON report path");
    evaluate->add_option("--seed", seed, "RNG seed");
    evaluate->add_option("--cache-dir", cache_dir, "Score cache directory (or $BBINIT_CACHE)");
    flags.add_to(evaluate);

    CLI::App* cv = app.add_subcommand("cv", "Grid sweep + leave-one-video-out cross-validation");
    cv->add_option("--dataset", dataset_root, "Dataset root directory")->required();
    cv->add_option("--grid", grid_path, "Grid JSON file")->required();
    cv->add_option("--method", method_name, "Optional check against the grid's method");
    cv->add_option("--measure", measure_name, "all|bb");
    cv->add_option("--workers", workers, "Worker thread count");
    cv->add_option("--seed", seed, "RNG seed");
    cv->add_option("--cache-dir", cache_dir, "Score cache directory (or $BBINIT_CACHE)");
    cv->add_option("--out", out_path, "CvReport JSON path")->required();

    CLI::App* render = app.add_subcommand("render", "Overlay a mask on its image");
    render->add_option("--image", image_path, "Input PNG")->required();
    render->add_option("--mask", mask_path, "Mask PNG")->required();
    render->add_option("--out", out_path, "Overlay PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (segment->parsed())
        return cmd_segment(image_path, region, region_file, method_name, flags, out_path,
                           gt_mask_path, matte_out, seed);
    if (evaluate->parsed())
        return cmd_evaluate(dataset_root, method_name, flags, measure_name, out_path, seed,
                            cache_dir);
    if (cv->parsed())
        return cmd_cv(dataset_root, grid_path, method_name, measure_name, workers, seed,
                      cache_dir, out_path);
    if (render->parsed()) return cmd_render(image_path, mask_path, out_path);
    return kExitUsage;
}
