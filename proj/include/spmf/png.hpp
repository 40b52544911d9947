#pragma once

// 8-bit RGB PNG encode/decode on top of libpng. Output carries no time or
// text chunks, so identical images give identical bytes.

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "spmf/error.hpp"
#include "spmf/image.hpp"

namespace spmf {

class PngError : public Error {
 public:
  using Error::Error;
};

namespace detail {

struct PngContext {
  std::jmp_buf jump;
  char message[256] = {0};
};

extern "C" inline void png_error_to_jump(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  std::strncpy(ctx->message, msg ? msg : "libpng error", sizeof(ctx->message) - 1);
  std::longjmp(ctx->jump, 1);
}

extern "C" inline void png_ignore_warning(png_structp, png_const_charp) {}

extern "C" inline void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

extern "C" inline void png_flush_noop(png_structp) {}

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

extern "C" inline void png_read_from_cursor(png_structp png, png_bytep dst, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (length > cur->size - cur->pos) png_error(png, "unexpected end of PNG data");
  std::memcpy(dst, cur->data + cur->pos, length);
  cur->pos += length;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_png(const SpmfImage& img) {
  if (img.empty()) throw ArgumentError("encode_png: empty image");
  if (img.pixels.size() != img.width * img.height) throw ArgumentError("encode_png: pixel buffer size mismatch");

  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(const_cast<RgbPixel*>(img.pixels.data() + y * img.width));
  }
  static_assert(sizeof(RgbPixel) == 3);

  detail::PngContext ctx;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, detail::png_error_to_jump,
                                            detail::png_ignore_warning);
  if (!png) throw PngError("encode_png: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw PngError("encode_png: png_create_info_struct failed");
  }
  if (setjmp(ctx.jump)) {
    png_destroy_write_struct(&png, &info);
    throw PngError(std::string("encode_png: ") + ctx.message);
  }
  png_set_write_fn(png, &out, detail::png_append, detail::png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

// Decodes any 8/16-bit PNG into RGB (alpha dropped, gray expanded).
inline SpmfImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw PngError("decode_png: not a PNG stream");

  SpmfImage img;
  std::vector<png_bytep> rows;
  detail::ReadCursor cursor{bytes.data(), bytes.size(), 0};
  detail::PngContext ctx;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, detail::png_error_to_jump,
                                           detail::png_ignore_warning);
  if (!png) throw PngError("decode_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw PngError("decode_png: png_create_info_struct failed");
  }
  if (setjmp(ctx.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw PngError(std::string("decode_png: ") + ctx.message);
  }
  png_set_read_fn(png, &cursor, detail::png_read_from_cursor);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 3) png_error(png, "unsupported pixel layout");
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  rows.resize(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = reinterpret_cast<png_bytep>(img.pixels.data() + y * w);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_png(const std::filesystem::path& path, const SpmfImage& img) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

inline SpmfImage read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

}  // namespace spmf
