#include "bbinit/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "bbinit/errors.hpp"

namespace bbinit {

Image::Image(int w, int h, Rgb fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w < 1 || h < 1) throw InvalidInput("Image extent must be positive");
}

BinaryMask::BinaryMask(int w, int h, int offset_x, int offset_y)
    : width(w), height(h), dx(offset_x), dy(offset_y),
      labels(static_cast<std::size_t>(w) * h, 0) {
    if (w < 1 || h < 1) throw InvalidInput("Mask extent must be positive");
}

std::size_t BinaryMask::count_ones() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

BoundingBox axis_aligned_hull(const std::vector<std::pair<double, double>>& polygon) {
    if (polygon.size() < 3) throw InvalidInput("Hull requires at least 3 points");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = xmax;
    for (const auto& [px, py] : polygon) {
        if (!std::isfinite(px) || !std::isfinite(py))
            throw InvalidInput("Hull point coordinates must be finite");
        xmin = std::min(xmin, px);
        xmax = std::max(xmax, px);
        ymin = std::min(ymin, py);
        ymax = std::max(ymax, py);
    }
    double w = xmax - xmin, h = ymax - ymin;
    if (w <= 0 || h <= 0) throw InvalidInput("Degenerate polygon: hull has zero area");
    return {xmin, ymin, w, h};
}

CroppedScene crop_context(const Image& frame, const BoundingBox& bbox) {
    if (bbox.w <= 0 || bbox.h <= 0) throw InvalidInput("Bounding box must have positive size");
    if (bbox.x >= frame.width || bbox.y >= frame.height ||
        bbox.x + bbox.w <= 0 || bbox.y + bbox.h <= 0)
        throw InvalidInput("Bounding box does not intersect the frame");

    // Ideal crop is 2w x 2h centred on the bbox centre, rounded outward.
    int x0 = std::max(0, static_cast<int>(std::floor(bbox.cx() - bbox.w)));
    int y0 = std::max(0, static_cast<int>(std::floor(bbox.cy() - bbox.h)));
    int x1 = std::min(frame.width, static_cast<int>(std::ceil(bbox.cx() + bbox.w)));
    int y1 = std::min(frame.height, static_cast<int>(std::ceil(bbox.cy() + bbox.h)));

    CroppedScene scene;
    scene.x0 = x0;
    scene.y0 = y0;
    scene.crop = Image(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            scene.crop.at(x - x0, y - y0) = frame.at(x, y);
    scene.bbox_local = {bbox.x - x0, bbox.y - y0, bbox.w, bbox.h};
    return scene;
}

BoundingBox scale_bbox_area(const BoundingBox& bbox, double rho) {
    if (!(rho > 0) || !std::isfinite(rho)) throw InvalidInput("Area ratio must be positive");
    double s = std::sqrt(rho);
    double w = bbox.w * s, h = bbox.h * s;
    return {bbox.cx() - w / 2.0, bbox.cy() - h / 2.0, w, h};
}

BinaryMask rasterize_bbox(const BoundingBox& bbox, int width, int height) {
    if (width < 1 || height < 1) throw InvalidInput("Raster extent must be positive");
    BinaryMask mask(width, height);
    int xa = std::max(0, static_cast<int>(std::floor(bbox.x - 0.5)));
    int ya = std::max(0, static_cast<int>(std::floor(bbox.y - 0.5)));
    int xb = std::min(width, static_cast<int>(std::ceil(bbox.x + bbox.w)) + 1);
    int yb = std::min(height, static_cast<int>(std::ceil(bbox.y + bbox.h)) + 1);
    for (int y = ya; y < yb; ++y)
        for (int x = xa; x < xb; ++x)
            if (bbox.contains_pixel_centre(x, y)) mask.at(x, y) = 1;
    return mask;
}

BinaryMask embed_in_frame(const BinaryMask& mask, int frame_width, int frame_height) {
    BinaryMask full(frame_width, frame_height);
    for (int y = 0; y < mask.height; ++y) {
        int fy = y + mask.dy;
        if (fy < 0 || fy >= frame_height) continue;
        for (int x = 0; x < mask.width; ++x) {
            int fx = x + mask.dx;
            if (fx < 0 || fx >= frame_width) continue;
            full.at(fx, fy) = mask.at(x, y);
        }
    }
    return full;
}

BoundingBox parse_region(const std::string& line) {
    std::vector<double> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        std::string tok = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw InvalidInput("Unparsable region field: '" + tok + "'");
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw InvalidInput("Unparsable region field: '" + tok + "'");
        fields.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (fields.size() == 4) {
        if (fields[2] <= 0 || fields[3] <= 0)
            throw InvalidInput("Region width and height must be positive");
        return {fields[0], fields[1], fields[2], fields[3]};
    }
    if (fields.size() == 8) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < 8; i += 2) pts.emplace_back(fields[i], fields[i + 1]);
        return axis_aligned_hull(pts);
    }
    throw InvalidInput("Region must have 4 or 8 comma-separated fields");
}

}  // namespace bbinit
