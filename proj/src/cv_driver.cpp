#include "bbinit/cv_driver.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "bbinit/errors.hpp"

namespace bbinit {

CvRunResult run_cv(const CvRunOptions& options) {
    Dataset dataset = load_dataset(options.dataset_root);
    ParamGrid grid = load_grid(options.grid_path);

    GridEvalOptions eval_options;
    eval_options.seed = options.seed;
    eval_options.cache_dir = options.cache_dir;
    eval_options.workers = options.workers;

    CvRunResult result;
    result.table = grid_evaluate(dataset, grid, eval_options);
    result.report = loo_cv(result.table, options.measure);

    if (!options.report_path.empty()) {
        std::ofstream out(options.report_path);
        if (!out) throw LoadError("Cannot write report: " + options.report_path);
        out << report_to_json(result.report, result.table).dump(2) << "\n";
    }

    std::ostringstream summary;
    summary << "method " << to_string(result.report.method) << ", measure phi_"
            << to_string(result.report.measure) << ", " << result.table.param_sets.size()
            << " grid points, " << result.table.frame_ids.size() << " frames (cache: "
            << result.table.cache_hits << " hits, " << result.table.cache_misses
            << " misses)\n";
    summary << std::fixed << std::setprecision(4);
    for (const CvFold& fold : result.report.folds) {
        double mean_all = 0.0, mean_bb = 0.0;
        std::size_t p = fold.selected_param_index;
        for (std::size_t f : fold.test_frames) {
            mean_all += result.table.phi_all[p][f];
            mean_bb += result.table.phi_bb[p][f];
        }
        mean_all /= static_cast<double>(fold.test_frames.size());
        mean_bb /= static_cast<double>(fold.test_frames.size());
        summary << "  " << std::left << std::setw(24) << fold.sequence << " phi_all "
                << mean_all << "  phi_bb " << mean_bb << "  params "
                << result.table.param_sets[p].dump() << "\n";
    }
    summary << "overall: phi_all " << result.report.mean_phi_all << "  phi_bb "
            << result.report.mean_phi_bb << "\n";
    result.summary = summary.str();
    return result;
}

}  // namespace bbinit
