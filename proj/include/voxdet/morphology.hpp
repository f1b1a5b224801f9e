#pragma once

#include <cstdint>
#include <initializer_list>
#include <set>
#include <vector>

#include "voxdet/volume.hpp"

namespace voxdet {

/// One boolean per voxel, sharing a volume's geometry.
struct BinaryMask {
    Geometry geom;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    explicit BinaryMask(const Geometry& g, bool fill = false)
        : geom(g), bits(g.voxel_count(), fill ? 1 : 0) {
        geom.validate();
    }

    bool get(int x, int y, int z) const { return bits[geom.index(x, y, z)] != 0; }
    void set(int x, int y, int z, bool v = true) { bits[geom.index(x, y, z)] = v ? 1 : 0; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }

    static BinaryMask from_labels(const LabelVolume& labels,
                                  const std::set<std::uint8_t>& codes);
    static BinaryMask from_nonzero(const LabelVolume& labels);
};

struct ComponentLabeling {
    Geometry geom;
    std::vector<std::int32_t> ids;       // 0 = background, components are 1..count
    std::int32_t count = 0;
    std::vector<std::size_t> sizes;      // sizes[k] = voxel count of component k+1

    /// Voxel linear indices of one component, ascending.
    std::vector<std::size_t> component_voxels(std::int32_t id) const;
};

/// Morphological dilation with a ball of the given physical radius; the ball is
/// discretized on the voxel lattice using per-axis spacing in mm.
BinaryMask dilate_sphere(const BinaryMask& mask, double radius_mm);

/// Flood labeling; component ids are assigned in ascending order of each
/// component's minimum linear voxel index. Connectivity is 6 or 26.
ComponentLabeling connected_components(const BinaryMask& mask, int connectivity);

/// Tightest box containing all set voxels; throws on an empty mask.
VoxelBox bounding_box(const BinaryMask& mask);

/// Grows each face outward by ceil(margin_mm / spacing_axis) voxels, clamped
/// to the volume bounds.
VoxelBox expand_box(const VoxelBox& box, double margin_mm, const Geometry& geom);

ScalarVolume crop(const ScalarVolume& vol, const VoxelBox& box);
LabelVolume crop(const LabelVolume& vol, const VoxelBox& box);
BinaryMask crop(const BinaryMask& mask, const VoxelBox& box);

}  // namespace voxdet
