#pragma once

#include <filesystem>

#include "voxdet/volume.hpp"

namespace voxdet::nrrd {

// Strict NRRD-0004 subset: fixed header line order, raw little-endian payload.
//   NRRD0004
//   type: float | uint8
//   dimension: 3
//   sizes: <nx> <ny> <nz>
//   space dimension: 3
//   space directions: (sx,0,0) (0,sy,0) (0,0,sz)
//   space origin: (ox,oy,oz)
//   endian: little
//   encoding: raw
//   <blank line>
//   <payload>
// Anything else is rejected.

AnyVolume read(const std::filesystem::path& path);
ScalarVolume read_scalar(const std::filesystem::path& path);
LabelVolume read_label(const std::filesystem::path& path);

void write(const ScalarVolume& vol, const std::filesystem::path& path);
void write(const LabelVolume& vol, const std::filesystem::path& path);
void write(const AnyVolume& vol, const std::filesystem::path& path);

}  // namespace voxdet::nrrd
