#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace voxdet {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Voxel lattice with physical spacing (mm/voxel) and world origin (mm).
/// Linear data order is x-fastest: index = x + nx*(y + ny*z).
struct Geometry {
    std::array<int, 3> dims{1, 1, 1};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    bool operator==(const Geometry&) const = default;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }

    std::array<int, 3> coords(std::size_t idx) const {
        const auto nx = static_cast<std::size_t>(dims[0]);
        const auto ny = static_cast<std::size_t>(dims[1]);
        return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
                static_cast<int>(idx / (nx * ny))};
    }

    bool contains(int x, int y, int z) const {
        return x >= 0 && x < dims[0] && y >= 0 && y < dims[1] && z >= 0 && z < dims[2];
    }

    Vec3 world(int x, int y, int z) const {
        return {origin[0] + x * spacing[0], origin[1] + y * spacing[1],
                origin[2] + z * spacing[2]};
    }

    /// Physical extent along each axis (dims * spacing), in mm.
    std::array<double, 3> extent_mm() const {
        return {dims[0] * spacing[0], dims[1] * spacing[1], dims[2] * spacing[2]};
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 1)
                throw std::invalid_argument("geometry: dims must be >= 1");
            if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
                throw std::invalid_argument("geometry: spacing must be positive and finite");
            if (!std::isfinite(origin[a]))
                throw std::invalid_argument("geometry: origin must be finite");
        }
    }
};

/// Axis-aligned voxel-index box, inclusive on both ends.
struct VoxelBox {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};

    bool operator==(const VoxelBox&) const = default;

    std::array<int, 3> size() const {
        return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    }

    bool contains(int x, int y, int z) const {
        return x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1] && z >= lo[2] &&
               z <= hi[2];
    }

    bool inside(const Geometry& g) const {
        for (int a = 0; a < 3; ++a)
            if (lo[a] < 0 || hi[a] < lo[a] || hi[a] >= g.dims[a]) return false;
        return true;
    }
};

}  // namespace voxdet
