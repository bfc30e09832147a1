#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bbinit {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB raster.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    Image() = default;
    Image(int w, int h, Rgb fill = {});

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// Axis-aligned box in real-valued image coordinates. May extend beyond the
/// frame; clamping is always an explicit operation.
struct BoundingBox {
    double x = 0, y = 0, w = 0, h = 0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }

    /// Pixel-centre membership with the half-open convention [x, x+w).
    bool contains_pixel_centre(int px, int py) const {
        double u = px + 0.5, v = py + 0.5;
        return u >= x && u < x + w && v >= y && v < y + h;
    }
};

/// Row-major 0/1 label raster, locatable within a larger frame via
/// origin_offset.
struct BinaryMask {
    int width = 0;
    int height = 0;
    int dx = 0, dy = 0;  // origin offset in the full frame
    std::vector<std::uint8_t> labels;

    BinaryMask() = default;
    BinaryMask(int w, int h, int offset_x = 0, int offset_y = 0);

    std::uint8_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count_ones() const;
};

/// A bbox-centred 2x context crop plus the geometry linking it back to the
/// source frame.
struct CroppedScene {
    Image crop;
    int x0 = 0, y0 = 0;       // crop origin in the source frame
    BoundingBox bbox_local;   // supplied box translated by -(x0, y0)
};

/// Minimal axis-aligned rectangle containing all points (>= 3 required).
BoundingBox axis_aligned_hull(const std::vector<std::pair<double, double>>& polygon);

/// Region of size 2w x 2h centred on the bbox centre, rounded outward to
/// integer pixels and intersected with the frame bounds.
CroppedScene crop_context(const Image& frame, const BoundingBox& bbox);

/// Same centre, dimensions scaled by sqrt(rho); output/input area ratio is rho.
BoundingBox scale_bbox_area(const BoundingBox& bbox, double rho);

/// Mask with label 1 for every pixel whose centre lies inside the box.
BinaryMask rasterize_bbox(const BoundingBox& bbox, int width, int height);

/// Re-embed a crop-local mask at its origin offset in a full frame extent.
BinaryMask embed_in_frame(const BinaryMask& mask, int frame_width, int frame_height);

/// Parse a comma-separated region line: 4 fields are "x,y,w,h", 8 fields are a
/// VOT polygon "x1,y1,...,x4,y4" reduced to its axis-aligned hull.
BoundingBox parse_region(const std::string& line);

}  // namespace bbinit
