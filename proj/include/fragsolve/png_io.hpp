#pragma once

#include <filesystem>

#include "fragsolve/raster.hpp"

namespace fragsolve {

/// Decodes any PNG into 8-bit RGBA (palette/gray/16-bit inputs expanded).
ImageRGBA read_png(const std::filesystem::path& path);

/// Writes 8-bit RGBA. Fixed encoder settings so output bytes are
/// reproducible for identical pixels.
void write_png(const std::filesystem::path& path, const ImageRGBA& image);

} // namespace fragsolve
