#include "bbinit/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "bbinit/errors.hpp"

namespace bbinit {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw LoadError("Cannot open file: " + path);
    return f;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw LoadError("libpng allocation failed");
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw LoadError("libpng allocation failed");
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;
};

// Decodes to 8-bit with `channels` output channels (3 = RGB, 1 = gray).
std::vector<std::uint8_t> decode_png(const std::string& path, int channels,
                                     int& width, int& height) {
    FilePtr file = open_file(path, "rb");
    PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw LoadError("Corrupt PNG file: " + path);

    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);

    png_set_strip_16(r.png);
    png_set_packing(r.png);
    png_set_strip_alpha(r.png);
    int colour = png_get_color_type(r.png, r.info);
    if (colour == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (channels == 3) {
        if (colour == PNG_COLOR_TYPE_GRAY || colour == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(r.png);
    } else {
        if (colour != PNG_COLOR_TYPE_GRAY && colour != PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
    }
    if (png_get_bit_depth(r.png, r.info) < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    png_read_update_info(r.png, r.info);

    width = static_cast<int>(png_get_image_width(r.png, r.info));
    height = static_cast<int>(png_get_image_height(r.png, r.info));
    if (static_cast<int>(png_get_channels(r.png, r.info)) != channels)
        throw LoadError("Unexpected channel count in PNG: " + path);

    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = data.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return data;
}

void encode_png(const std::string& path, int width, int height, int channels,
                int bit_depth, const std::uint8_t* data) {
    FilePtr file = open_file(path, "wb");
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw LoadError("PNG write failed: " + path);

    png_init_io(w.png, file.get());
    int colour = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(w.png, w.info, width, height, bit_depth, colour,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    if (bit_depth == 16) png_set_swap(w.png);  // values are host little-endian

    std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(data + y * stride);
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

}  // namespace

Image read_png(const std::string& path) {
    int w = 0, h = 0;
    std::vector<std::uint8_t> data = decode_png(path, 3, w, h);
    Image img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        img.pixels[i] = {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
    return img;
}

std::pair<int, int> read_png_size(const std::string& path) {
    FilePtr file = open_file(path, "rb");
    PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw LoadError("Corrupt PNG file: " + path);
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);
    return {static_cast<int>(png_get_image_width(r.png, r.info)),
            static_cast<int>(png_get_image_height(r.png, r.info))};
}

void write_png(const std::string& path, const Image& image) {
    std::vector<std::uint8_t> data;
    data.reserve(image.pixel_count() * 3);
    for (const Rgb& p : image.pixels) {
        data.push_back(p.r);
        data.push_back(p.g);
        data.push_back(p.b);
    }
    encode_png(path, image.width, image.height, 3, 8, data.data());
}

BinaryMask read_mask_png(const std::string& path) {
    int w = 0, h = 0;
    std::vector<std::uint8_t> data = decode_png(path, 1, w, h);
    BinaryMask mask(w, h);
    for (std::size_t i = 0; i < data.size(); ++i)
        mask.labels[i] = data[i] > 127 ? 1 : 0;
    return mask;
}

void write_mask_png(const std::string& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> data(mask.labels.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = mask.labels[i] ? 255 : 0;
    encode_png(path, mask.width, mask.height, 1, 8, data.data());
}

void write_gray16_png(const std::string& path, int width, int height,
                      const std::vector<std::uint16_t>& values) {
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw InvalidInput("Value buffer does not match extent");
    encode_png(path, width, height, 1, 16,
               reinterpret_cast<const std::uint8_t*>(values.data()));
}

}  // namespace bbinit
