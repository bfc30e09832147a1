#pragma once

#include <set>
#include <vector>

#include "bbinit/core.hpp"

namespace bbinit {

/// Per-pixel superpixel labels partitioning a crop; every label in
/// [0, n_superpixels) is used and 4-connected.
struct SuperpixelMap {
    int width = 0;
    int height = 0;
    int n_superpixels = 0;
    std::vector<int> labels;

    int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::vector<std::vector<int>> pixel_lists() const;  // flat pixel indices per label
};

/// Superpixel indices split by bounding-box containment: background ids have
/// no pixel centre inside the box, unknown ids have at least one.
struct BBoxPartition {
    std::set<int> background_ids;
    std::set<int> unknown_ids;
};

/// clamp(round(crop_pixels / 50), 100, 500).
int target_superpixel_count(std::size_t crop_pixels);

/// SLIC0: k-means in (L,a,b,x,y) with grid-initialised centres and per-cluster
/// adaptive colour normalisers, followed by connectivity enforcement.
SuperpixelMap slic0_segment(const Image& crop, int n_target, int max_iters = 10);

BBoxPartition partition_by_bbox(const SuperpixelMap& spmap, const BoundingBox& bbox_local);

BinaryMask mask_from_superpixels(const SuperpixelMap& spmap, const std::set<int>& object_ids);

}  // namespace bbinit
