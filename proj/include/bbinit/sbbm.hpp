#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bbinit/core.hpp"
#include "bbinit/superpixel.hpp"

namespace bbinit {

/// Deterministic 64-bit generator (splitmix64) so that sampled models are
/// reproducible across platforms for a fixed seed.
class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, n) via the multiply-shift reduction.
    std::size_t bounded(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

/// Colour model of one superpixel: s RGB samples drawn with replacement.
struct SampleModel {
    std::vector<Eigen::Vector3d> samples;
    int source_id = -1;
};

struct SbbmConfig {
    double delta = 0.5;   // sampling fraction of the mean superpixel size
    double eta = 0.8;     // match-fraction threshold (strict >)
    double radius = 20.0; // RGB colour radius
    std::uint64_t seed = 0;
    int slic_max_iters = 10;
};

SampleModel build_model(const SuperpixelMap& spmap, const Image& crop, int sp_id,
                        std::size_t s, SampleRng& rng);

/// 1 iff some sample lies strictly closer than radius (Euclidean RGB).
int pixel_match(const Eigen::Vector3d& x, const SampleModel& model, double radius);

/// Fraction of the query's samples matching the background model.
double model_match(const SampleModel& query, const SampleModel& background, double radius);

/// Full pipeline: unknown superpixels failing to match every background model
/// (max match fraction <= eta) form the object mask.
BinaryMask sbbm_segment(const Image& frame, const BoundingBox& bbox, const SbbmConfig& config);

}  // namespace bbinit
