#pragma once

#include <filesystem>
#include <string>

#include "curvpose/image.h"
#include "curvpose/renderer.h"

namespace curvpose {

// Raw little-endian float32 grid: 8-byte magic "CPGRID32", uint32 height,
// uint32 width, then height * width floats in row-major order.
inline constexpr char kGridMagic[8] = {'C', 'P', 'G', 'R', 'I', 'D', '3', '2'};

void write_raw_grid(const std::filesystem::path& path, const ImageF& grid);
ImageF read_raw_grid(const std::filesystem::path& path);

// 16-bit grayscale PNG of a scalar grid plus a JSON sidecar (same stem, ".json")
// holding {version, kind, view_index, scale}. Stored value = round(v * scale),
// clamped to [0, 65535]; non-finite values are stored as 0. The scale maps the
// largest finite value to 65535 (1 for an all-zero grid).
double export_png16(const std::filesystem::path& path, const ImageF& grid, const std::string& kind,
                    int view_index);

// 16-bit RGB PNG of a normal map, stored as round((n + 1) / 2 * 65535); uncovered
// pixels are written as 0. Sidecar as above with scale 32767.5 and offset 1.
void export_normals_png16(const std::filesystem::path& path, const NormalPlanes& normals, int view_index);

}  // namespace curvpose
