#pragma once

#include <string>

#include "bbinit/eval.hpp"

namespace bbinit {

/// Options for one full grid-sweep + leave-one-video-out run.
struct CvRunOptions {
    std::string dataset_root;
    std::string grid_path;
    Measure measure = Measure::All;
    int workers = 1;
    std::uint64_t seed = 0;
    std::string cache_dir;     // empty: no cache
    std::string report_path;   // CvReport JSON output
};

struct CvRunResult {
    CvReport report;
    ScoreTable table;
    std::string summary;  // human-readable per-fold table
};

/// Runs the sweep and cross-validation, writes the report JSON (byte-stable
/// for identical inputs/seed/workers), and returns the in-memory results.
CvRunResult run_cv(const CvRunOptions& options);

}  // namespace bbinit
