#pragma once

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "voxdet/geometry.hpp"

namespace voxdet {

/// Dense 3D grid of 32-bit reals (images and likelihood maps).
struct ScalarVolume {
    Geometry geom;
    std::vector<float> data;

    ScalarVolume() = default;
    explicit ScalarVolume(const Geometry& g, float fill = 0.0f)
        : geom(g), data(g.voxel_count(), fill) {
        geom.validate();
    }

    float& at(int x, int y, int z) { return data[geom.index(x, y, z)]; }
    float at(int x, int y, int z) const { return data[geom.index(x, y, z)]; }

    void validate() const {
        geom.validate();
        if (data.size() != geom.voxel_count())
            throw std::invalid_argument("scalar volume: data length != nx*ny*nz");
    }

    /// Likelihood maps must hold values in [0,1].
    void validate_likelihood() const {
        validate();
        for (float v : data)
            if (!(v >= 0.0f && v <= 1.0f))
                throw std::invalid_argument("likelihood volume: value outside [0,1]");
    }
};

// Label code table. Fixed; unknown codes are rejected on load.
enum LabelCode : std::uint8_t {
    kBackground = 0,
    kTumor = 1,
    kPancreas = 2,
    kVeins = 3,
    kArteries = 4,
    kPancreaticDuct = 5,
    kCommonBileDuct = 6,
    kCyst = 7,
    kThrombosis = 8,
};
inline constexpr std::uint8_t kMaxLabelCode = 8;

/// Dense 3D grid of 8-bit class codes (segmentations).
struct LabelVolume {
    Geometry geom;
    std::vector<std::uint8_t> data;

    LabelVolume() = default;
    explicit LabelVolume(const Geometry& g, std::uint8_t fill = 0)
        : geom(g), data(g.voxel_count(), fill) {
        geom.validate();
    }

    std::uint8_t& at(int x, int y, int z) { return data[geom.index(x, y, z)]; }
    std::uint8_t at(int x, int y, int z) const { return data[geom.index(x, y, z)]; }

    void validate() const {
        geom.validate();
        if (data.size() != geom.voxel_count())
            throw std::invalid_argument("label volume: data length != nx*ny*nz");
        for (std::uint8_t c : data)
            if (c > kMaxLabelCode)
                throw std::invalid_argument("label volume: unknown label code " +
                                            std::to_string(int(c)));
    }
};

using AnyVolume = std::variant<ScalarVolume, LabelVolume>;

inline const Geometry& geometry_of(const AnyVolume& v) {
    return std::visit([](const auto& vol) -> const Geometry& { return vol.geom; }, v);
}

}  // namespace voxdet
