#include "blendforge/image_io.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

#include <png.h>

#include "blendforge/errors.hpp"

namespace blendforge {

namespace {

constexpr int kZlibLevel = 6;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    throw IoError(std::string("libpng: ") + msg);
    (void)png;
}

void png_warn_fn(png_structp, png_const_charp) {}

struct MemorySink {
    std::vector<std::uint8_t> bytes;
};

void mem_write_fn(png_structp png, png_bytep data, png_size_t length) {
    auto* sink = static_cast<MemorySink*>(png_get_io_ptr(png));
    sink->bytes.insert(sink->bytes.end(), data, data + length);
}

void mem_flush_fn(png_structp) {}

class PngWriter {
  public:
    PngWriter() {
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) throw IoError("libpng: failed to allocate write structs");
        png_set_compression_level(png_, kZlibLevel);
    }
    ~PngWriter() { png_destroy_write_struct(&png_, &info_); }

    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class PngReader {
  public:
    PngReader() {
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) throw IoError("libpng: failed to allocate read structs");
    }
    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }

    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

void write_rgb_rows(png_structp png, png_infop info, const RgbImage& image) {
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_const_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) rows[y] = image.at(0, y);
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(rows[y]));
    png_write_end(png, info);
}

}  // namespace

void write_rgb_png(const RgbImage& image, const std::string& path) {
    if (image.empty()) throw EmptyImage("write_rgb_png: empty image");
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot open for writing: " + path);
    PngWriter w;
    png_init_io(w.png_, file.get());
    write_rgb_rows(w.png_, w.info_, image);
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image) {
    if (image.empty()) throw EmptyImage("encode_rgb_png: empty image");
    MemorySink sink;
    PngWriter w;
    png_set_write_fn(w.png_, &sink, mem_write_fn, mem_flush_fn);
    write_rgb_rows(w.png_, w.info_, image);
    return std::move(sink.bytes);
}

RgbImage read_rgb_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open: " + path);
    PngReader r;
    png_init_io(r.png_, file.get());
    png_read_info(r.png_, r.info_);

    const int width = png_get_image_width(r.png_, r.info_);
    const int height = png_get_image_height(r.png_, r.info_);
    const int color = png_get_color_type(r.png_, r.info_);
    const int depth = png_get_bit_depth(r.png_, r.info_);

    // Normalize palettes / gray / alpha down to 8-bit RGB.
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png_);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(r.png_);
    if (depth == 16) png_set_strip_16(r.png_);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png_);
    png_read_update_info(r.png_, r.info_);

    RgbImage image(width, height);
    for (int y = 0; y < height; ++y) png_read_row(r.png_, image.at(0, y), nullptr);
    png_read_end(r.png_, nullptr);
    return image;
}

void write_seg_png(const SegMap& seg, const std::string& path) {
    if (seg.width <= 0 || seg.height <= 0) throw EmptyImage("write_seg_png: empty map");
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot open for writing: " + path);
    PngWriter w;
    png_init_io(w.png_, file.get());
    png_set_IHDR(w.png_, w.info_, seg.width, seg.height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png_, w.info_);
    // PNG stores 16-bit samples big-endian; convert each row.
    std::vector<std::uint8_t> row(static_cast<size_t>(seg.width) * 2);
    for (int y = 0; y < seg.height; ++y) {
        for (int x = 0; x < seg.width; ++x) {
            const std::uint16_t v = seg.at(x, y);
            row[2 * x] = static_cast<std::uint8_t>(v >> 8);
            row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xff);
        }
        png_write_row(w.png_, row.data());
    }
    png_write_end(w.png_, w.info_);
}

SegMap read_seg_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open: " + path);
    PngReader r;
    png_init_io(r.png_, file.get());
    png_read_info(r.png_, r.info_);

    if (png_get_color_type(r.png_, r.info_) != PNG_COLOR_TYPE_GRAY ||
        png_get_bit_depth(r.png_, r.info_) != 16)
        throw ParseError(path + ": segmentation maps must be 16-bit grayscale PNG");

    const int width = png_get_image_width(r.png_, r.info_);
    const int height = png_get_image_height(r.png_, r.info_);
    png_read_update_info(r.png_, r.info_);

    SegMap seg(width, height);
    std::vector<std::uint8_t> row(static_cast<size_t>(width) * 2);
    for (int y = 0; y < height; ++y) {
        png_read_row(r.png_, row.data(), nullptr);
        for (int x = 0; x < width; ++x)
            seg.at(x, y) = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
    }
    png_read_end(r.png_, nullptr);
    return seg;
}

}  // namespace blendforge
