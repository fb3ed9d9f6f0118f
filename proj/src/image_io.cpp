#include "pd/image_io.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

#include <png.h>

namespace pd {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_pfm(const std::string& path, int width, int height,
               std::span<const float> pixels) {
  if (static_cast<size_t>(width) * height != pixels.size()) {
    throw ShapeMismatch("write_pfm: pixel count mismatch");
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::fprintf(f.get(), "Pf\n%d %d\n-1.0\n", width, height);
  const size_t written =
      std::fwrite(pixels.data(), sizeof(float), pixels.size(), f.get());
  if (written != pixels.size()) throw IoError("write failed: " + path);
}

FloatImage read_pfm(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);
  char magic[3] = {};
  FloatImage img;
  float scale = 0.0f;
  if (std::fscanf(f.get(), "%2s %d %d %f", magic, &img.width, &img.height,
                  &scale) != 4 ||
      std::strcmp(magic, "Pf") != 0) {
    throw IoError(path + ": not a single-channel PFM");
  }
  if (scale >= 0.0f) {
    throw IoError(path + ": big-endian PFM not supported");
  }
  if (img.width <= 0 || img.height <= 0) {
    throw IoError(path + ": bad dimensions");
  }
  std::fgetc(f.get());  // single whitespace byte after the header
  img.pixels.resize(static_cast<size_t>(img.width) * img.height);
  const size_t read =
      std::fread(img.pixels.data(), sizeof(float), img.pixels.size(), f.get());
  if (read != img.pixels.size()) throw IoError(path + ": truncated PFM");
  return img;
}

void write_png16(const std::string& path, int width, int height,
                 std::span<const uint16_t> rgb) {
  if (static_cast<size_t>(width) * height * 3 != rgb.size()) {
    throw ShapeMismatch("write_png16: pixel count mismatch");
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open " + path + " for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng write failed: " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);  // host little-endian -> PNG network order
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(
        const_cast<uint16_t*>(rgb.data() + static_cast<size_t>(y) * width * 3));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Rgb16Image read_png16(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng read failed: " + path);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 16 ||
      png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": expected 16-bit RGB PNG");
  }
  Rgb16Image img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  png_set_swap(png);
  img.pixels.resize(static_cast<size_t>(img.width) * img.height * 3);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(
        img.pixels.data() + static_cast<size_t>(y) * img.width * 3);
  }
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace pd
