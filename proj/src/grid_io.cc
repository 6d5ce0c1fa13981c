#include "curvpose/grid_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include <json.hpp>

#include "curvpose/errors.h"

namespace curvpose {
namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<std::uint16_t>& samples) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 16, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * channels * 2);
  for (int r = 0; r < height; ++r) {
    for (int k = 0; k < width * channels; ++k) {
      const std::uint16_t s = samples[static_cast<std::size_t>(r) * width * channels + k];
      row[2 * k] = static_cast<unsigned char>(s >> 8);  // PNG is big-endian
      row[2 * k + 1] = static_cast<unsigned char>(s & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_sidecar(const std::filesystem::path& png_path, const nlohmann::json& j) {
  std::filesystem::path side = png_path;
  side.replace_extension(".json");
  std::ofstream out(side);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + side.string());
  out << j.dump(2) << "\n";
}

std::uint16_t quantize(double v) {
  if (!std::isfinite(v)) return 0;
  return static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, 65535.0));
}

}  // namespace

void write_raw_grid(const std::filesystem::path& path, const ImageF& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(kGridMagic, sizeof(kGridMagic));
  put_u32(out, static_cast<std::uint32_t>(grid.height()));
  put_u32(out, static_cast<std::uint32_t>(grid.width()));
  for (float v : grid.pixels()) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

ImageF read_raw_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kGridMagic, 8) != 0) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": not a float32 grid");
  }
  const std::uint32_t h = get_u32(bytes.data() + 8);
  const std::uint32_t w = get_u32(bytes.data() + 12);
  const std::uint64_t n = static_cast<std::uint64_t>(h) * w;
  if (h == 0 || w == 0 || bytes.size() != 16 + 4 * n) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": size does not match header");
  }
  ImageF grid(static_cast<int>(w), static_cast<int>(h));
  auto px = grid.pixels();
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::uint32_t bits = get_u32(bytes.data() + 16 + 4 * k);
    std::memcpy(&px[k], &bits, 4);
  }
  return grid;
}

double export_png16(const std::filesystem::path& path, const ImageF& grid, const std::string& kind,
                    int view_index) {
  double max_v = 0.0;
  for (float v : grid.pixels()) {
    if (std::isfinite(v)) max_v = std::max(max_v, static_cast<double>(v));
  }
  const double scale = max_v > 0.0 ? 65535.0 / max_v : 1.0;
  std::vector<std::uint16_t> samples;
  samples.reserve(grid.size());
  for (float v : grid.pixels()) samples.push_back(quantize(static_cast<double>(v) * scale));
  write_png(path, grid.width(), grid.height(), 1, samples);
  write_sidecar(path, {{"version", 1}, {"kind", kind}, {"view_index", view_index}, {"scale", scale},
                       {"offset", 0.0}});
  return scale;
}

void export_normals_png16(const std::filesystem::path& path, const NormalPlanes& normals, int view_index) {
  std::vector<std::uint16_t> samples;
  samples.reserve(static_cast<std::size_t>(normals.width()) * normals.height() * 3);
  for (int r = 0; r < normals.height(); ++r) {
    for (int c = 0; c < normals.width(); ++c) {
      const bool covered = normals.covered(r, c);
      const Eigen::Vector3f n = normals.normal(r, c);
      for (int k = 0; k < 3; ++k) samples.push_back(covered ? quantize((n[k] + 1.0) * 32767.5) : 0);
    }
  }
  write_png(path, normals.width(), normals.height(), 3, samples);
  write_sidecar(path, {{"version", 1}, {"kind", "normals"}, {"view_index", view_index}, {"scale", 32767.5},
                       {"offset", 1.0}});
}

}  // namespace curvpose
