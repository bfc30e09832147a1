#include "bbinit/sbbm.hpp"

#include <algorithm>
#include <cmath>

#include "bbinit/errors.hpp"

namespace bbinit {

SampleModel build_model(const SuperpixelMap& spmap, const Image& crop, int sp_id,
                        std::size_t s, SampleRng& rng) {
    if (s < 1) throw InvalidInput("Sample count must be at least 1");
    if (sp_id < 0 || sp_id >= spmap.n_superpixels)
        throw InvalidInput("Superpixel index out of range");

    std::vector<int> pixels;
    for (std::size_t i = 0; i < spmap.labels.size(); ++i)
        if (spmap.labels[i] == sp_id) pixels.push_back(static_cast<int>(i));
    if (pixels.empty()) throw InvalidInput("Cannot sample from an empty superpixel");

    SampleModel model;
    model.source_id = sp_id;
    model.samples.reserve(s);
    for (std::size_t i = 0; i < s; ++i) {
        const Rgb& p = crop.pixels[pixels[rng.bounded(pixels.size())]];
        model.samples.emplace_back(p.r, p.g, p.b);
    }
    return model;
}

int pixel_match(const Eigen::Vector3d& x, const SampleModel& model, double radius) {
    if (!(radius > 0)) throw InvalidInput("radius must be positive");
    double r2 = radius * radius;
    for (const Eigen::Vector3d& sample : model.samples)
        if ((sample - x).squaredNorm() < r2) return 1;
    return 0;
}

double model_match(const SampleModel& query, const SampleModel& background, double radius) {
    if (query.samples.empty() || background.samples.empty())
        throw InvalidInput("model_match requires non-empty models");
    std::size_t matched = 0;
    for (const Eigen::Vector3d& x : query.samples)
        matched += pixel_match(x, background, radius);
    return static_cast<double>(matched) / static_cast<double>(query.samples.size());
}

BinaryMask sbbm_segment(const Image& frame, const BoundingBox& bbox, const SbbmConfig& config) {
    if (!(config.delta > 0 && config.delta <= 1)) throw InvalidInput("delta must lie in (0, 1]");
    if (!(config.eta > 0 && config.eta <= 1)) throw InvalidInput("eta must lie in (0, 1]");
    if (!(config.radius > 0)) throw InvalidInput("radius must be positive");

    CroppedScene scene = crop_context(frame, bbox);
    SuperpixelMap spmap = slic0_segment(
        scene.crop, target_superpixel_count(scene.crop.pixel_count()), config.slic_max_iters);
    BBoxPartition part = partition_by_bbox(spmap, scene.bbox_local);
    if (part.background_ids.empty())
        throw InsufficientBackground("No background superpixels outside the box");

    // Mean superpixel size is crop-global.
    double mean_np = static_cast<double>(scene.crop.pixel_count()) / spmap.n_superpixels;
    std::size_t s = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.delta * mean_np)));

    // One generator, consumed in ascending superpixel-id order.
    SampleRng rng(config.seed);
    std::vector<SampleModel> models(spmap.n_superpixels);
    for (int id = 0; id < spmap.n_superpixels; ++id)
        models[id] = build_model(spmap, scene.crop, id, s, rng);

    std::set<int> object_ids;
    for (int id : part.unknown_ids) {
        bool matches_background = false;
        for (int bg : part.background_ids) {
            if (model_match(models[id], models[bg], config.radius) > config.eta) {
                matches_background = true;
                break;
            }
        }
        if (!matches_background) object_ids.insert(id);
    }

    BinaryMask mask = mask_from_superpixels(spmap, object_ids);
    mask.dx = scene.x0;
    mask.dy = scene.y0;
    return embed_in_frame(mask, frame.width, frame.height);
}

}  // namespace bbinit
