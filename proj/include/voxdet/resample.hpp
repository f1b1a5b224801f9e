#pragma once

#include "voxdet/volume.hpp"

namespace voxdet {

enum class ResampleMode { Linear, Nearest };

/// In-plane (x/y) resampling. The z axis is untouched and spacing is rescaled
/// so the physical extent of the volume is preserved; voxel edges of the old
/// and new grids coincide, voxel centers do not.
ScalarVolume resample_inplane(const ScalarVolume& vol, int target_nx, int target_ny,
                              ResampleMode mode);

/// Labels are always resampled nearest-neighbor.
LabelVolume resample_inplane(const LabelVolume& vol, int target_nx, int target_ny);

/// Variant dispatch; throws if linear mode is requested for a LabelVolume.
AnyVolume resample_inplane(const AnyVolume& vol, int target_nx, int target_ny,
                           ResampleMode mode);

}  // namespace voxdet
