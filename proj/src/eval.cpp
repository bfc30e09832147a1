#include "bbinit/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "bbinit/errors.hpp"
#include "bbinit/image_io.hpp"
#include "bbinit/lbdm.hpp"
#include "bbinit/ocsvm.hpp"
#include "bbinit/sbbm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bbinit {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

std::uint64_t hash_file(const std::string& path, std::uint64_t h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("Cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a(buf.str(), h);
}

void check_extent_match(const BinaryMask& a, const BinaryMask& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw InvalidInput(std::string("Mask extents differ in ") + what);
}

}  // namespace

Method method_from_string(const std::string& name) {
    if (name == "ocsvm") return Method::Ocsvm;
    if (name == "sbbm") return Method::Sbbm;
    if (name == "lbdm") return Method::Lbdm;
    if (name == "entire-bb") return Method::EntireBB;
    throw InvalidInput("Unknown method: " + name);
}

std::string to_string(Method method) {
    switch (method) {
        case Method::Ocsvm: return "ocsvm";
        case Method::Sbbm: return "sbbm";
        case Method::Lbdm: return "lbdm";
        case Method::EntireBB: return "entire-bb";
    }
    return "?";
}

Measure measure_from_string(const std::string& name) {
    if (name == "all") return Measure::All;
    if (name == "bb") return Measure::Bb;
    throw InvalidInput("Unknown measure: " + name + " (expected all|bb)");
}

std::string to_string(Measure measure) {
    return measure == Measure::All ? "all" : "bb";
}

double iou(const BinaryMask& G, const BinaryMask& P) {
    check_extent_match(G, P, "iou");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < G.labels.size(); ++i) {
        inter += G.labels[i] & P.labels[i];
        uni += G.labels[i] | P.labels[i];
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_bb(const BinaryMask& G, const BinaryMask& P, const BinaryMask& B) {
    check_extent_match(G, P, "iou_bb");
    check_extent_match(G, B, "iou_bb");
    std::size_t num = 0, den = 0;
    for (std::size_t i = 0; i < G.labels.size(); ++i) {
        if (!B.labels[i]) continue;
        num += G.labels[i] & P.labels[i];
        den += G.labels[i] | P.labels[i];
    }
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

double dsc_from_iou(double phi) {
    if (!(phi >= 0.0 && phi <= 1.0)) throw InvalidInput("phi must lie in [0, 1]");
    return 2.0 * phi / (1.0 + phi);
}

std::pair<double, double> baseline_entire_bb(const BinaryMask& G, const BoundingBox& bbox) {
    BinaryMask B = rasterize_bbox(bbox, G.width, G.height);
    return {iou(G, B), iou_bb(G, B, B)};
}

Dataset load_dataset(const std::string& root) {
    if (!fs::is_directory(root)) throw LoadError("Dataset root is not a directory: " + root);

    Dataset dataset;
    std::vector<fs::path> seq_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) seq_dirs.push_back(entry.path());
    std::sort(seq_dirs.begin(), seq_dirs.end());

    for (const fs::path& dir : seq_dirs) {
        Sequence seq;
        seq.name = dir.filename().string();

        fs::path frames_dir = dir / "frames";
        fs::path masks_dir = dir / "masks";
        fs::path gt_path = dir / "groundtruth.txt";
        if (!fs::is_directory(frames_dir)) throw LoadError("Missing directory: " + frames_dir.string());
        if (!fs::is_directory(masks_dir)) throw LoadError("Missing directory: " + masks_dir.string());

        std::vector<fs::path> frame_files, mask_files;
        for (const auto& f : fs::directory_iterator(frames_dir))
            if (f.path().extension() == ".png") frame_files.push_back(f.path());
        for (const auto& f : fs::directory_iterator(masks_dir))
            if (f.path().extension() == ".png") mask_files.push_back(f.path());
        std::sort(frame_files.begin(), frame_files.end());
        std::sort(mask_files.begin(), mask_files.end());
        if (frame_files.empty()) throw LoadError("No frames in " + frames_dir.string());
        if (mask_files.size() != frame_files.size())
            throw LoadError("Frame/mask count mismatch in " + dir.string());

        std::ifstream gt(gt_path);
        if (!gt) throw LoadError("Cannot open file: " + gt_path.string());
        std::vector<BoundingBox> regions;
        std::string line;
        while (std::getline(gt, line)) {
            if (line.empty()) continue;
            try {
                regions.push_back(parse_region(line));
            } catch (const InvalidInput& e) {
                throw LoadError(gt_path.string() + ": " + e.what());
            }
        }
        if (regions.size() < frame_files.size())
            throw LoadError("Too few regions in " + gt_path.string());

        for (std::size_t i = 0; i < frame_files.size(); ++i) {
            auto [iw, ih] = read_png_size(frame_files[i].string());
            auto [mw, mh] = read_png_size(mask_files[i].string());
            if (iw != mw || ih != mh)
                throw LoadError("Mask extent does not match its frame: " + mask_files[i].string());
            seq.frames.push_back({frame_files[i].string(), mask_files[i].string(), regions[i]});
        }
        dataset.sequences.push_back(std::move(seq));
    }
    if (dataset.sequences.empty()) throw LoadError("Dataset has no sequences: " + root);
    return dataset;
}

std::vector<std::size_t> select_frame_indices(std::size_t length) {
    if (length == 0) throw InvalidInput("Empty sequence");
    std::vector<std::size_t> out{0};
    std::size_t mid = (length - 1) / 2, last = length - 1;
    if (mid != 0) out.push_back(mid);
    if (last != mid && last != 0) out.push_back(last);
    return out;
}

namespace {

std::vector<std::string> axis_order(Method method) {
    switch (method) {
        case Method::Ocsvm: return {"nu", "gamma"};
        case Method::Sbbm: return {"delta", "eta"};
        case Method::Lbdm: return {"rho_plus", "rho_minus", "tau", "lambda"};
        case Method::EntireBB: return {};
    }
    return {};
}

void check_range(const json& params, const char* key, double lo, double hi,
                 bool lo_open, bool hi_open) {
    if (!params.contains(key)) return;
    double v = params.at(key).get<double>();
    bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    if (!ok || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << key << "=" << v << " outside legal range " << (lo_open ? "(" : "[") << lo << ", "
            << hi << (hi_open ? ")" : "]");
        throw InvalidInput(msg.str());
    }
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void validate_params(Method method, const json& params) {
    switch (method) {
        case Method::Ocsvm:
            check_range(params, "nu", 0, 1, true, true);
            check_range(params, "gamma", 0, kInf, true, true);
            if (params.contains("feature"))
                feature_kind_from_string(params.at("feature").get<std::string>());
            break;
        case Method::Sbbm:
            check_range(params, "delta", 0, 1, true, false);
            check_range(params, "eta", 0, 1, true, false);
            check_range(params, "radius", 0, kInf, true, true);
            break;
        case Method::Lbdm:
            check_range(params, "rho_minus", 0, 1, true, true);
            check_range(params, "rho_plus", 1, 2, true, false);
            check_range(params, "tau", 0.5, 1, false, false);
            check_range(params, "lambda", 0, kInf, true, true);
            check_range(params, "c", 0, kInf, true, true);
            break;
        case Method::EntireBB:
            break;
    }
}

std::size_t ParamGrid::size() const {
    std::size_t n = 1;
    for (const auto& [name, values] : axes) n *= values.size();
    return n;
}

json ParamGrid::point(std::size_t index) const {
    json params = fixed;
    // Row-major over the axes, last axis fastest.
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
        params[it->first] = it->second[index % it->second.size()];
        index /= it->second.size();
    }
    return params;
}

ParamGrid parse_grid(const json& spec) {
    ParamGrid grid;
    grid.method = method_from_string(spec.at("method").get<std::string>());
    const json& axes = spec.at("axes");
    for (const std::string& name : axis_order(grid.method)) {
        if (!axes.contains(name)) throw InvalidInput("Grid is missing axis: " + name);
        std::vector<double> values = axes.at(name).get<std::vector<double>>();
        if (values.empty()) throw InvalidInput("Grid axis is empty: " + name);
        grid.axes.emplace_back(name, std::move(values));
    }
    if (spec.contains("fixed")) grid.fixed = spec.at("fixed");
    for (std::size_t i = 0; i < grid.size(); ++i) validate_params(grid.method, grid.point(i));
    return grid;
}

ParamGrid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("Cannot open grid file: " + path);
    json spec;
    try {
        in >> spec;
    } catch (const json::exception& e) {
        throw LoadError(path + ": " + e.what());
    }
    return parse_grid(spec);
}

BinaryMask run_method(const Image& frame, const BoundingBox& bbox, Method method,
                      const json& params, std::uint64_t seed) {
    validate_params(method, params);
    auto get = [&params](const char* key, double fallback) {
        return params.contains(key) ? params.at(key).get<double>() : fallback;
    };
    BinaryMask mask;
    switch (method) {
        case Method::Ocsvm: {
            OcsvmConfig cfg;
            if (params.contains("feature"))
                cfg.feature = feature_kind_from_string(params.at("feature").get<std::string>());
            cfg.nu = params.at("nu").get<double>();
            cfg.gamma = params.at("gamma").get<double>();
            cfg.slic_max_iters = static_cast<int>(get("slic_max_iters", 10));
            mask = ocsvm_segment(frame, bbox, cfg);
            break;
        }
        case Method::Sbbm: {
            SbbmConfig cfg;
            cfg.delta = params.at("delta").get<double>();
            cfg.eta = params.at("eta").get<double>();
            cfg.radius = get("radius", 20.0);
            cfg.slic_max_iters = static_cast<int>(get("slic_max_iters", 10));
            cfg.seed = seed;
            mask = sbbm_segment(frame, bbox, cfg);
            break;
        }
        case Method::Lbdm: {
            LbdmConfig cfg;
            cfg.rho_minus = params.at("rho_minus").get<double>();
            cfg.rho_plus = params.at("rho_plus").get<double>();
            cfg.tau = params.at("tau").get<double>();
            cfg.lambda = params.at("lambda").get<double>();
            cfg.c = get("c", 800.0);
            cfg.window = static_cast<int>(get("window", 1));
            cfg.cg_tol = get("cg_tol", 1e-6);
            cfg.cg_max_iters = static_cast<int>(get("cg_max_iters", 10000));
            mask = lbdm_segment(frame, bbox, cfg);
            break;
        }
        case Method::EntireBB:
            return rasterize_bbox(bbox, frame.width, frame.height);
    }
    return embed_in_frame(mask, frame.width, frame.height);
}

namespace {

struct FrameData {
    std::string id;
    int sequence = 0;
    Image image;
    BinaryMask gt;
    BoundingBox bbox;
    BinaryMask bb_raster;
    std::uint64_t content_hash = 0;
};

struct CellResult {
    double phi_all = 0.0;
    double phi_bb = 0.0;
    std::string error;
};

CellResult evaluate_cell(const FrameData& frame, Method method, const json& params,
                         std::uint64_t seed) {
    CellResult result;
    try {
        BinaryMask pred = run_method(frame.image, frame.bbox, method, params, seed);
        result.phi_all = iou(frame.gt, pred);
        result.phi_bb = iou_bb(frame.gt, pred, frame.bb_raster);
    } catch (const std::exception& e) {
        result.phi_all = 0.0;
        result.phi_bb = 0.0;
        result.error = e.what();
    }
    return result;
}

std::string cache_key(Method method, const json& params, std::uint64_t seed,
                      std::uint64_t content_hash) {
    std::uint64_t h = fnv1a(to_string(method));
    h = fnv1a(params.dump(), h);  // object keys are stored sorted
    h = fnv1a(&seed, sizeof(seed), h);
    h = fnv1a(&content_hash, sizeof(content_hash), h);
    std::ostringstream name;
    name << std::hex << std::setw(16) << std::setfill('0') << h;
    return name.str();
}

std::optional<CellResult> cache_read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        json entry;
        in >> entry;
        CellResult result;
        result.phi_all = entry.at("phi_all").get<double>();
        result.phi_bb = entry.at("phi_bb").get<double>();
        result.error = entry.value("error", "");
        return result;
    } catch (const json::exception&) {
        return std::nullopt;  // stale or corrupt entry: recompute
    }
}

void cache_write(const fs::path& path, const CellResult& result) {
    json entry{{"phi_all", result.phi_all}, {"phi_bb", result.phi_bb}};
    if (!result.error.empty()) entry["error"] = result.error;
    // Atomic per-entry file: write to a unique temp name, then rename.
    std::ostringstream tmp_name;
    tmp_name << path.filename().string() << ".tmp."
             << std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp);
        out << entry.dump();
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fs::remove(tmp, ec);
}

}  // namespace

ScoreTable grid_evaluate(const Dataset& dataset, const ParamGrid& grid,
                         const GridEvalOptions& options) {
    if (dataset.sequences.empty()) throw InvalidInput("Dataset is empty");

    // Preload the selected frames once; the sweep revisits them constantly.
    std::vector<FrameData> frames;
    for (std::size_t s = 0; s < dataset.sequences.size(); ++s) {
        const Sequence& seq = dataset.sequences[s];
        for (std::size_t idx : select_frame_indices(seq.frames.size())) {
            const FrameRecord& rec = seq.frames[idx];
            FrameData data;
            data.id = seq.name + "/" + fs::path(rec.image_path).filename().string();
            data.sequence = static_cast<int>(s);
            data.image = read_png(rec.image_path);
            data.gt = read_mask_png(rec.mask_path);
            if (data.gt.width != data.image.width || data.gt.height != data.image.height)
                throw LoadError("Mask extent does not match its frame: " + rec.mask_path);
            data.bbox = rec.bbox;
            data.bb_raster = rasterize_bbox(rec.bbox, data.image.width, data.image.height);
            std::uint64_t h = hash_file(rec.image_path, fnv1a("frame"));
            h = hash_file(rec.mask_path, h);
            std::ostringstream region;
            region.precision(17);
            region << rec.bbox.x << "," << rec.bbox.y << "," << rec.bbox.w << "," << rec.bbox.h;
            data.content_hash = fnv1a(region.str(), h);
            frames.push_back(std::move(data));
        }
    }

    const std::size_t n_params = grid.size();
    const std::size_t n_frames = frames.size();

    ScoreTable table;
    table.method = grid.method;
    table.param_sets.reserve(n_params);
    for (std::size_t p = 0; p < n_params; ++p) table.param_sets.push_back(grid.point(p));
    for (const FrameData& f : frames) {
        table.frame_ids.push_back(f.id);
        table.frame_sequence.push_back(f.sequence);
    }
    table.phi_all.assign(n_params, std::vector<double>(n_frames, 0.0));
    table.phi_bb.assign(n_params, std::vector<double>(n_frames, 0.0));
    table.errors.assign(n_params, std::vector<std::string>(n_frames));

    const bool use_cache = !options.cache_dir.empty();
    if (use_cache) fs::create_directories(options.cache_dir);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> hits{0}, misses{0};
    const std::size_t total = n_params * n_frames;
    const int workers = std::max(1, options.workers);

    auto worker = [&]() {
        for (;;) {
            std::size_t task = next.fetch_add(1);
            if (task >= total) break;
            std::size_t p = task / n_frames, f = task % n_frames;
            const json& params = table.param_sets[p];

            std::optional<CellResult> result;
            fs::path entry_path;
            if (use_cache) {
                entry_path = fs::path(options.cache_dir) /
                             (cache_key(grid.method, params, options.seed,
                                        frames[f].content_hash) + ".json");
                result = cache_read(entry_path);
            }
            if (result) {
                hits.fetch_add(1);
            } else {
                misses.fetch_add(1);
                result = evaluate_cell(frames[f], grid.method, params, options.seed);
                if (use_cache) cache_write(entry_path, *result);
            }
            table.phi_all[p][f] = result->phi_all;
            table.phi_bb[p][f] = result->phi_bb;
            table.errors[p][f] = result->error;
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    table.cache_hits = hits.load();
    table.cache_misses = misses.load();
    return table;
}

CvReport loo_cv(const ScoreTable& table, Measure measure) {
    if (table.param_sets.empty() || table.frame_ids.empty())
        throw InvalidInput("Score table is empty");

    const auto& scores = measure == Measure::All ? table.phi_all : table.phi_bb;
    int n_sequences = 0;
    for (int s : table.frame_sequence) n_sequences = std::max(n_sequences, s + 1);

    CvReport report;
    report.method = table.method;
    report.measure = measure;

    double sum_all = 0.0, sum_bb = 0.0;
    std::size_t n_test = 0;
    for (int held = 0; held < n_sequences; ++held) {
        CvFold fold;
        std::vector<std::size_t> train;
        for (std::size_t f = 0; f < table.frame_sequence.size(); ++f) {
            if (table.frame_sequence[f] == held)
                fold.test_frames.push_back(f);
            else
                train.push_back(f);
        }
        // Single-sequence datasets degenerate to training on the held-out
        // frames themselves.
        if (train.empty()) train = fold.test_frames;

        std::size_t best = 0;
        double best_mean = -1.0;
        for (std::size_t p = 0; p < table.param_sets.size(); ++p) {
            double mean = 0.0;
            for (std::size_t f : train) mean += scores[p][f];
            mean /= static_cast<double>(train.size());
            if (mean > best_mean) {  // ties keep the earlier grid point
                best_mean = mean;
                best = p;
            }
        }
        fold.selected_param_index = best;
        std::size_t seq_idx = fold.test_frames.front();
        fold.sequence = table.frame_ids[seq_idx].substr(0, table.frame_ids[seq_idx].find('/'));
        for (std::size_t f : fold.test_frames) {
            sum_all += table.phi_all[best][f];
            sum_bb += table.phi_bb[best][f];
            ++n_test;
        }
        report.folds.push_back(std::move(fold));
    }
    report.mean_phi_all = sum_all / static_cast<double>(n_test);
    report.mean_phi_bb = sum_bb / static_cast<double>(n_test);
    return report;
}

json report_to_json(const CvReport& report, const ScoreTable& table) {
    json folds = json::array();
    for (const CvFold& fold : report.folds) {
        json frames = json::array();
        for (std::size_t f : fold.test_frames) {
            std::size_t p = fold.selected_param_index;
            json frame{{"frame", table.frame_ids[f]},
                       {"phi_all", table.phi_all[p][f]},
                       {"phi_bb", table.phi_bb[p][f]}};
            if (!table.errors[p][f].empty()) frame["error"] = table.errors[p][f];
            frames.push_back(std::move(frame));
        }
        folds.push_back(json{{"sequence", fold.sequence},
                             {"selected_params", table.param_sets[fold.selected_param_index]},
                             {"frames", std::move(frames)}});
    }
    return json{{"method", to_string(report.method)},
                {"measure", to_string(report.measure)},
                {"folds", std::move(folds)},
                {"mean_phi_all", report.mean_phi_all},
                {"mean_phi_bb", report.mean_phi_bb}};
}

}  // namespace bbinit
