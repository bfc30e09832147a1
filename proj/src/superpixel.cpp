#include "bbinit/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "bbinit/errors.hpp"
#include "bbinit/features.hpp"

namespace bbinit {

namespace {

struct Centre {
    double L = 0, a = 0, b = 0, x = 0, y = 0;
    double max_dc2 = 100.0;  // squared colour normaliser, initial m = 10
};

// Relabels every connected component that is not its label's largest to the
// largest 4-adjacent superpixel (ties: smallest label). Repeats until each
// label forms a single component.
void enforce_connectivity(std::vector<int>& labels, int width, int height, int n_labels) {
    const std::size_t n = labels.size();
    auto idx = [width](int x, int y) { return static_cast<std::size_t>(y) * width + x; };

    for (;;) {
        std::vector<int> comp(n, -1);
        std::vector<std::size_t> comp_size;
        std::vector<int> comp_label;
        std::vector<std::size_t> comp_start;  // a representative pixel per component

        for (std::size_t start = 0; start < n; ++start) {
            if (comp[start] != -1) continue;
            int id = static_cast<int>(comp_size.size());
            comp_size.push_back(0);
            comp_label.push_back(labels[start]);
            comp_start.push_back(start);
            std::queue<std::size_t> queue;
            queue.push(start);
            comp[start] = id;
            while (!queue.empty()) {
                std::size_t p = queue.front();
                queue.pop();
                ++comp_size[id];
                int x = static_cast<int>(p % width), y = static_cast<int>(p / width);
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= width || ny[k] < 0 || ny[k] >= height) continue;
                    std::size_t q = idx(nx[k], ny[k]);
                    if (comp[q] == -1 && labels[q] == labels[p]) {
                        comp[q] = id;
                        queue.push(q);
                    }
                }
            }
        }

        // Largest component per label keeps it; ties go to the earliest
        // component in raster order.
        std::vector<int> keeper(n_labels, -1);
        for (int id = 0; id < static_cast<int>(comp_size.size()); ++id) {
            int lab = comp_label[id];
            if (keeper[lab] == -1 || comp_size[id] > comp_size[keeper[lab]]) keeper[lab] = id;
        }

        std::vector<std::size_t> label_count(n_labels, 0);
        for (int lab : labels) ++label_count[lab];

        bool changed = false;
        for (int id = 0; id < static_cast<int>(comp_size.size()); ++id) {
            if (id == keeper[comp_label[id]]) continue;
            // Collect this orphan's pixels, then pick the largest adjacent
            // superpixel under the current labelling.
            std::vector<std::size_t> members;
            std::vector<std::size_t> stack{comp_start[id]};
            std::vector<char> visited(n, 0);
            visited[comp_start[id]] = 1;
            while (!stack.empty()) {
                std::size_t p = stack.back();
                stack.pop_back();
                members.push_back(p);
                int x = static_cast<int>(p % width), y = static_cast<int>(p / width);
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= width || ny[k] < 0 || ny[k] >= height) continue;
                    std::size_t q = idx(nx[k], ny[k]);
                    if (comp[q] == id && !visited[q]) {
                        visited[q] = 1;
                        stack.push_back(q);
                    }
                }
            }
            int own = comp_label[id];
            int best = -1;
            for (std::size_t p : members) {
                int x = static_cast<int>(p % width), y = static_cast<int>(p / width);
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= width || ny[k] < 0 || ny[k] >= height) continue;
                    int lab = labels[idx(nx[k], ny[k])];
                    if (lab == own) continue;
                    if (best == -1 || label_count[lab] > label_count[best] ||
                        (label_count[lab] == label_count[best] && lab < best))
                        best = lab;
                }
            }
            if (best == -1) continue;  // single-label image; nothing adjacent
            for (std::size_t p : members) labels[p] = best;
            label_count[own] -= members.size();
            label_count[best] += members.size();
            changed = true;
        }
        if (!changed) break;
    }
}

}  // namespace

std::vector<std::vector<int>> SuperpixelMap::pixel_lists() const {
    std::vector<std::vector<int>> lists(n_superpixels);
    for (std::size_t i = 0; i < labels.size(); ++i)
        lists[labels[i]].push_back(static_cast<int>(i));
    return lists;
}

int target_superpixel_count(std::size_t crop_pixels) {
    if (crop_pixels < 1) throw InvalidInput("Empty crop");
    long long target = std::llround(crop_pixels / 50.0);
    return static_cast<int>(std::clamp(target, 100LL, 500LL));
}

SuperpixelMap slic0_segment(const Image& crop, int n_target, int max_iters) {
    const int W = crop.width, H = crop.height;
    const std::size_t N = crop.pixel_count();
    if (N == 0) throw InvalidInput("Empty crop");
    if (n_target < 1) throw InvalidInput("n_target must be at least 1");
    if (static_cast<std::size_t>(n_target) > N)
        throw InvalidInput("More superpixels requested than pixels available");

    std::vector<double> labL(N), labA(N), labB(N);
    for (std::size_t i = 0; i < N; ++i) {
        auto [L, a, b] = srgb_to_lab(crop.pixels[i]);
        labL[i] = L;
        labA[i] = a;
        labB[i] = b;
    }

    const double S = std::sqrt(static_cast<double>(N) / n_target);
    int nx = std::max(1, static_cast<int>(std::lround(W / S)));
    int ny = std::max(1, static_cast<int>(std::lround(H / S)));
    // Never seed more centres than pixels.
    while (static_cast<std::size_t>(nx) * ny > N) (nx > ny ? nx : ny) -= 1;
    double sx = static_cast<double>(W) / nx, sy = static_cast<double>(H) / ny;

    std::vector<Centre> centres;
    centres.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Centre c;
            c.x = (i + 0.5) * sx;
            c.y = (j + 0.5) * sy;
            int px = std::min(W - 1, static_cast<int>(c.x));
            int py = std::min(H - 1, static_cast<int>(c.y));
            std::size_t p = static_cast<std::size_t>(py) * W + px;
            c.L = labL[p];
            c.a = labA[p];
            c.b = labB[p];
            centres.push_back(c);
        }
    const int K = static_cast<int>(centres.size());

    std::vector<int> labels(N, -1);
    std::vector<double> best_d(N);
    std::vector<double> best_dc2(N);
    const double search = std::max({S, sx, sy});

    for (int iter = 0; iter < max_iters; ++iter) {
        std::fill(best_d.begin(), best_d.end(), std::numeric_limits<double>::infinity());
        std::fill(labels.begin(), labels.end(), -1);
        for (int k = 0; k < K; ++k) {
            const Centre& c = centres[k];
            double norm_c = std::max(c.max_dc2, 1e-12);
            int xlo = std::max(0, static_cast<int>(std::floor(c.x - search)));
            int xhi = std::min(W, static_cast<int>(std::ceil(c.x + search)));
            int ylo = std::max(0, static_cast<int>(std::floor(c.y - search)));
            int yhi = std::min(H, static_cast<int>(std::ceil(c.y + search)));
            for (int y = ylo; y < yhi; ++y)
                for (int x = xlo; x < xhi; ++x) {
                    std::size_t p = static_cast<std::size_t>(y) * W + x;
                    double dL = labL[p] - c.L, da = labA[p] - c.a, db = labB[p] - c.b;
                    double dc2 = dL * dL + da * da + db * db;
                    double dx = (x + 0.5) - c.x, dy = (y + 0.5) - c.y;
                    double d = dc2 / norm_c + (dx * dx + dy * dy) / (S * S);
                    if (d < best_d[p]) {
                        best_d[p] = d;
                        best_dc2[p] = dc2;
                        labels[p] = k;
                    }
                }
        }
        // Pixels outside every search window (possible once centres move):
        // assign the spatially nearest centre.
        for (std::size_t p = 0; p < N; ++p) {
            if (labels[p] != -1) continue;
            int x = static_cast<int>(p % W), y = static_cast<int>(p / W);
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                double dx = (x + 0.5) - centres[k].x, dy = (y + 0.5) - centres[k].y;
                double d = dx * dx + dy * dy;
                if (d < best) {
                    best = d;
                    labels[p] = k;
                }
            }
            double dL = labL[p] - centres[labels[p]].L;
            double da = labA[p] - centres[labels[p]].a;
            double db = labB[p] - centres[labels[p]].b;
            best_dc2[p] = dL * dL + da * da + db * db;
        }

        std::vector<Centre> next(K);
        std::vector<std::size_t> counts(K, 0);
        std::vector<double> max_dc2(K, 0.0);
        for (std::size_t p = 0; p < N; ++p) {
            int k = labels[p];
            next[k].L += labL[p];
            next[k].a += labA[p];
            next[k].b += labB[p];
            next[k].x += (p % W) + 0.5;
            next[k].y += (p / W) + 0.5;
            ++counts[k];
            max_dc2[k] = std::max(max_dc2[k], best_dc2[p]);
        }
        for (int k = 0; k < K; ++k) {
            if (counts[k] == 0) continue;  // empty cluster keeps its centre
            double inv = 1.0 / counts[k];
            centres[k].L = next[k].L * inv;
            centres[k].a = next[k].a * inv;
            centres[k].b = next[k].b * inv;
            centres[k].x = next[k].x * inv;
            centres[k].y = next[k].y * inv;
            centres[k].max_dc2 = max_dc2[k];
        }
    }

    // Compact away clusters that ended up empty.
    std::vector<std::size_t> counts(K, 0);
    for (int lab : labels) ++counts[lab];
    std::vector<int> remap(K, -1);
    int n_used = 0;
    for (int k = 0; k < K; ++k)
        if (counts[k] > 0) remap[k] = n_used++;
    for (int& lab : labels) lab = remap[lab];

    enforce_connectivity(labels, W, H, n_used);

    SuperpixelMap map;
    map.width = W;
    map.height = H;
    map.n_superpixels = n_used;
    map.labels = std::move(labels);
    return map;
}

BBoxPartition partition_by_bbox(const SuperpixelMap& spmap, const BoundingBox& bbox_local) {
    std::vector<char> touched(spmap.n_superpixels, 0);
    for (int y = 0; y < spmap.height; ++y)
        for (int x = 0; x < spmap.width; ++x)
            if (bbox_local.contains_pixel_centre(x, y)) touched[spmap.at(x, y)] = 1;
    BBoxPartition part;
    for (int k = 0; k < spmap.n_superpixels; ++k)
        (touched[k] ? part.unknown_ids : part.background_ids).insert(k);
    return part;
}

BinaryMask mask_from_superpixels(const SuperpixelMap& spmap, const std::set<int>& object_ids) {
    for (int id : object_ids)
        if (id < 0 || id >= spmap.n_superpixels)
            throw InvalidInput("Superpixel index out of range");
    BinaryMask mask(spmap.width, spmap.height);
    for (std::size_t i = 0; i < spmap.labels.size(); ++i)
        if (object_ids.count(spmap.labels[i])) mask.labels[i] = 1;
    return mask;
}

}  // namespace bbinit
