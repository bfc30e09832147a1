#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbinit/core.hpp"

namespace bbinit {

enum class Method { Ocsvm, Sbbm, Lbdm, EntireBB };
enum class Measure { All, Bb };

Method method_from_string(const std::string& name);
std::string to_string(Method method);
Measure measure_from_string(const std::string& name);
std::string to_string(Measure measure);

/// Jaccard index |G n P| / |G u P|; 1.0 when both masks are empty.
double iou(const BinaryMask& G, const BinaryMask& P);

/// Box-restricted Jaccard |G n P n B| / |(G u P) n B|; 1.0 on an empty
/// denominator.
double iou_bb(const BinaryMask& G, const BinaryMask& P, const BinaryMask& B);

/// Dice coefficient 2 phi / (1 + phi).
double dsc_from_iou(double phi);

/// Scores of the segmentation P == B: (phi_all, phi_bb).
std::pair<double, double> baseline_entire_bb(const BinaryMask& G, const BoundingBox& bbox);

struct FrameRecord {
    std::string image_path;
    std::string mask_path;
    BoundingBox bbox;
};

struct Sequence {
    std::string name;
    std::vector<FrameRecord> frames;
};

struct Dataset {
    std::vector<Sequence> sequences;
};

/// Layout: root/<sequence>/frames/*.png, root/<sequence>/groundtruth.txt,
/// root/<sequence>/masks/*.png. Validates file references and extents.
Dataset load_dataset(const std::string& root);

/// First, middle, and last indices, deduplicated in order.
std::vector<std::size_t> select_frame_indices(std::size_t length);

/// Named axes expanded to a full Cartesian product in a fixed per-method
/// axis order; `fixed` entries are merged into every parameter set.
struct ParamGrid {
    Method method = Method::Lbdm;
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    nlohmann::json fixed = nlohmann::json::object();

    std::size_t size() const;
    nlohmann::json point(std::size_t index) const;  // deterministic enumeration
};

ParamGrid parse_grid(const nlohmann::json& spec);
ParamGrid load_grid(const std::string& path);

/// Throws InvalidInput when a parameter set violates its method's legal range.
void validate_params(Method method, const nlohmann::json& params);

/// One method invocation; returns the predicted full-frame mask.
BinaryMask run_method(const Image& frame, const BoundingBox& bbox, Method method,
                      const nlohmann::json& params, std::uint64_t seed);

struct ScoreTable {
    Method method = Method::Lbdm;
    std::vector<nlohmann::json> param_sets;
    std::vector<std::string> frame_ids;      // "<sequence>/<image filename>"
    std::vector<int> frame_sequence;         // sequence index per frame column
    std::vector<std::vector<double>> phi_all;  // [param][frame]
    std::vector<std::vector<double>> phi_bb;
    std::vector<std::vector<std::string>> errors;  // empty string = success
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
};

struct GridEvalOptions {
    std::uint64_t seed = 0;
    std::string cache_dir;  // empty disables the on-disk cache
    int workers = 1;
};

/// Evaluates every grid point on the first/middle/last frames of every
/// sequence. Individual failures score 0 and are annotated, never aborting
/// the sweep.
ScoreTable grid_evaluate(const Dataset& dataset, const ParamGrid& grid,
                         const GridEvalOptions& options);

struct CvFold {
    std::string sequence;
    std::size_t selected_param_index = 0;
    std::vector<std::size_t> test_frames;  // columns of the score table
};

struct CvReport {
    Method method = Method::Lbdm;
    Measure measure = Measure::All;
    std::vector<CvFold> folds;
    double mean_phi_all = 0.0;
    double mean_phi_bb = 0.0;
};

/// Leave-one-video-out: per fold, the argmax-mean parameters over all other
/// sequences' frames (ties to the earlier grid point) are scored on the
/// held-out frames.
CvReport loo_cv(const ScoreTable& table, Measure measure);

/// Deterministic JSON serialisation of a report against its score table.
nlohmann::json report_to_json(const CvReport& report, const ScoreTable& table);

}  // namespace bbinit
