// Test-fixture generator: writes a single frame/region pair, a tiny
// VOT-layout dataset, and a mismatched-extent image into a directory.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bbinit/image_io.hpp"
#include "../tests/synthetic.hpp"

namespace fs = std::filesystem;
using namespace bbinit;
using namespace bbinit::testutil;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: make_fixture <out_dir>\n");
        return 2;
    }
    fs::path out = argv[1];
    fs::create_directories(out);

    SyntheticScene scene = make_square_scene(80, 24, 42);
    write_png((out / "frame.png").string(), scene.frame);
    write_mask_png((out / "gt.png").string(), scene.ground_truth);
    std::ofstream region(out / "region.txt");
    region << scene.bbox.x << "," << scene.bbox.y << "," << scene.bbox.w << ","
           << scene.bbox.h << "\n";

    Image small(10, 10);
    for (auto& p : small.pixels) p = {10, 200, 10};
    write_png((out / "small.png").string(), small);

    for (int s = 0; s < 2; ++s) {
        fs::path seq = out / "data" / ("seq" + std::to_string(s));
        fs::create_directories(seq / "frames");
        fs::create_directories(seq / "masks");
        std::ofstream gt(seq / "groundtruth.txt");
        for (int f = 0; f < 3; ++f) {
            SyntheticScene sc =
                make_square_scene(80, 24 + 4 * s, static_cast<std::uint32_t>(100 * s + f));
            char name[16];
            std::snprintf(name, sizeof(name), "%08d.png", f + 1);
            write_png((seq / "frames" / name).string(), sc.frame);
            write_mask_png((seq / "masks" / name).string(), sc.ground_truth);
            gt << sc.bbox.x << "," << sc.bbox.y << "," << sc.bbox.w << "," << sc.bbox.h
               << "\n";
        }
    }
    return 0;
}
