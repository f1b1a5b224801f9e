#include "voxdet/resample.hpp"

#include <algorithm>
#include <cmath>

namespace voxdet {
namespace {

struct AxisMap {
    int src_n;
    double scale;  // source voxels per target voxel

    // Continuous source coordinate of target voxel center i (voxel-center frame,
    // edges aligned: source edge 0 sits at coordinate -0.5).
    double src_coord(int i) const { return (i + 0.5) * scale - 0.5; }

    // Nearest source center; exact half-way ties go to the lower index.
    int nearest(int i) const {
        int j = static_cast<int>(std::ceil(src_coord(i) - 0.5));
        return std::clamp(j, 0, src_n - 1);
    }
};

Geometry target_geometry(const Geometry& g, int target_nx, int target_ny) {
    if (target_nx < 1 || target_ny < 1)
        throw std::invalid_argument("resample: target dims must be >= 1");
    Geometry out = g;
    out.dims[0] = target_nx;
    out.dims[1] = target_ny;
    out.spacing[0] = g.dims[0] * g.spacing[0] / target_nx;
    out.spacing[1] = g.dims[1] * g.spacing[1] / target_ny;
    // Keep volume edges fixed in world space; centers shift by half the
    // spacing difference.
    out.origin[0] = g.origin[0] - 0.5 * g.spacing[0] + 0.5 * out.spacing[0];
    out.origin[1] = g.origin[1] - 0.5 * g.spacing[1] + 0.5 * out.spacing[1];
    return out;
}

}  // namespace

ScalarVolume resample_inplane(const ScalarVolume& vol, int target_nx, int target_ny,
                              ResampleMode mode) {
    vol.validate();
    const Geometry& g = vol.geom;
    ScalarVolume out(target_geometry(g, target_nx, target_ny));
    const AxisMap mx{g.dims[0], double(g.dims[0]) / target_nx};
    const AxisMap my{g.dims[1], double(g.dims[1]) / target_ny};

    for (int z = 0; z < g.dims[2]; ++z) {
        for (int y = 0; y < target_ny; ++y) {
            for (int x = 0; x < target_nx; ++x) {
                float v;
                if (mode == ResampleMode::Nearest) {
                    v = vol.at(mx.nearest(x), my.nearest(y), z);
                } else {
                    const double sx = std::clamp(mx.src_coord(x), 0.0, g.dims[0] - 1.0);
                    const double sy = std::clamp(my.src_coord(y), 0.0, g.dims[1] - 1.0);
                    const int x0 = std::min(static_cast<int>(sx), g.dims[0] - 2 >= 0 ? g.dims[0] - 2 : 0);
                    const int y0 = std::min(static_cast<int>(sy), g.dims[1] - 2 >= 0 ? g.dims[1] - 2 : 0);
                    const int x1 = std::min(x0 + 1, g.dims[0] - 1);
                    const int y1 = std::min(y0 + 1, g.dims[1] - 1);
                    const double fx = sx - x0;
                    const double fy = sy - y0;
                    const double v00 = vol.at(x0, y0, z);
                    const double v10 = vol.at(x1, y0, z);
                    const double v01 = vol.at(x0, y1, z);
                    const double v11 = vol.at(x1, y1, z);
                    v = static_cast<float>((1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
                                           (1 - fx) * fy * v01 + fx * fy * v11);
                }
                out.at(x, y, z) = v;
            }
        }
    }
    return out;
}

LabelVolume resample_inplane(const LabelVolume& vol, int target_nx, int target_ny) {
    vol.validate();
    const Geometry& g = vol.geom;
    LabelVolume out(target_geometry(g, target_nx, target_ny));
    const AxisMap mx{g.dims[0], double(g.dims[0]) / target_nx};
    const AxisMap my{g.dims[1], double(g.dims[1]) / target_ny};
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < target_ny; ++y)
            for (int x = 0; x < target_nx; ++x)
                out.at(x, y, z) = vol.at(mx.nearest(x), my.nearest(y), z);
    return out;
}

AnyVolume resample_inplane(const AnyVolume& vol, int target_nx, int target_ny,
                           ResampleMode mode) {
    if (const auto* s = std::get_if<ScalarVolume>(&vol))
        return resample_inplane(*s, target_nx, target_ny, mode);
    if (mode == ResampleMode::Linear)
        throw std::invalid_argument("resample: linear mode is invalid for label volumes");
    return resample_inplane(std::get<LabelVolume>(vol), target_nx, target_ny);
}

}  // namespace voxdet
