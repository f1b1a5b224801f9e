#include "voxdet/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace voxdet {
namespace {

Geometry cropped_geometry(const Geometry& g, const VoxelBox& box) {
    if (!box.inside(g)) throw std::invalid_argument("crop: box out of volume bounds");
    Geometry out = g;
    const auto sz = box.size();
    out.dims = {sz[0], sz[1], sz[2]};
    for (int a = 0; a < 3; ++a) out.origin[a] = g.origin[a] + box.lo[a] * g.spacing[a];
    return out;
}

template <typename Vol>
Vol crop_impl(const Vol& vol, const VoxelBox& box) {
    Vol out(cropped_geometry(vol.geom, box));
    const auto sz = box.size();
    for (int z = 0; z < sz[2]; ++z)
        for (int y = 0; y < sz[1]; ++y)
            for (int x = 0; x < sz[0]; ++x)
                out.at(x, y, z) = vol.at(box.lo[0] + x, box.lo[1] + y, box.lo[2] + z);
    return out;
}

}  // namespace

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::from_labels(const LabelVolume& labels,
                                   const std::set<std::uint8_t>& codes) {
    BinaryMask m(labels.geom);
    for (std::size_t i = 0; i < labels.data.size(); ++i)
        m.bits[i] = codes.count(labels.data[i]) ? 1 : 0;
    return m;
}

BinaryMask BinaryMask::from_nonzero(const LabelVolume& labels) {
    BinaryMask m(labels.geom);
    for (std::size_t i = 0; i < labels.data.size(); ++i)
        m.bits[i] = labels.data[i] != 0 ? 1 : 0;
    return m;
}

std::vector<std::size_t> ComponentLabeling::component_voxels(std::int32_t id) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) out.push_back(i);
    return out;
}

BinaryMask dilate_sphere(const BinaryMask& mask, double radius_mm) {
    if (!(radius_mm > 0.0)) throw std::invalid_argument("dilate_sphere: radius must be > 0");
    const Geometry& g = mask.geom;

    // Lattice offsets whose physical distance from the center is <= radius.
    struct Off { int dx, dy, dz; };
    std::vector<Off> ball;
    const int rx = static_cast<int>(std::floor(radius_mm / g.spacing[0]));
    const int ry = static_cast<int>(std::floor(radius_mm / g.spacing[1]));
    const int rz = static_cast<int>(std::floor(radius_mm / g.spacing[2]));
    const double r2 = radius_mm * radius_mm;
    for (int dz = -rz; dz <= rz; ++dz)
        for (int dy = -ry; dy <= ry; ++dy)
            for (int dx = -rx; dx <= rx; ++dx) {
                const double d2 = dx * g.spacing[0] * dx * g.spacing[0] +
                                  dy * g.spacing[1] * dy * g.spacing[1] +
                                  dz * g.spacing[2] * dz * g.spacing[2];
                if (d2 <= r2) ball.push_back({dx, dy, dz});
            }

    BinaryMask out(g);
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                if (!mask.get(x, y, z)) continue;
                for (const Off& o : ball) {
                    const int nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
                    if (g.contains(nx, ny, nz)) out.set(nx, ny, nz);
                }
            }
    return out;
}

ComponentLabeling connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 6 && connectivity != 26)
        throw std::invalid_argument("connected_components: connectivity must be 6 or 26");
    const Geometry& g = mask.geom;

    struct Off { int dx, dy, dz; };
    std::vector<Off> nbrs;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                if (connectivity == 6 && std::abs(dx) + std::abs(dy) + std::abs(dz) != 1)
                    continue;
                nbrs.push_back({dx, dy, dz});
            }

    ComponentLabeling out;
    out.geom = g;
    out.ids.assign(g.voxel_count(), 0);

    std::vector<std::size_t> stack;
    // Linear scan seeds components at their minimum linear index, which makes
    // ids ascend with that minimum.
    for (std::size_t seed = 0; seed < mask.bits.size(); ++seed) {
        if (!mask.bits[seed] || out.ids[seed] != 0) continue;
        const std::int32_t id = ++out.count;
        std::size_t size = 0;
        stack.assign(1, seed);
        out.ids[seed] = id;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            ++size;
            const auto c = g.coords(cur);
            for (const Off& o : nbrs) {
                const int nx = c[0] + o.dx, ny = c[1] + o.dy, nz = c[2] + o.dz;
                if (!g.contains(nx, ny, nz)) continue;
                const std::size_t ni = g.index(nx, ny, nz);
                if (mask.bits[ni] && out.ids[ni] == 0) {
                    out.ids[ni] = id;
                    stack.push_back(ni);
                }
            }
        }
        out.sizes.push_back(size);
    }
    return out;
}

VoxelBox bounding_box(const BinaryMask& mask) {
    const Geometry& g = mask.geom;
    VoxelBox box{{g.dims[0], g.dims[1], g.dims[2]}, {-1, -1, -1}};
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                if (!mask.get(x, y, z)) continue;
                box.lo = {std::min(box.lo[0], x), std::min(box.lo[1], y), std::min(box.lo[2], z)};
                box.hi = {std::max(box.hi[0], x), std::max(box.hi[1], y), std::max(box.hi[2], z)};
            }
    if (box.hi[0] < 0) throw std::runtime_error("bounding_box: mask is empty");
    return box;
}

VoxelBox expand_box(const VoxelBox& box, double margin_mm, const Geometry& geom) {
    if (margin_mm < 0.0) throw std::invalid_argument("expand_box: margin must be >= 0");
    VoxelBox out = box;
    for (int a = 0; a < 3; ++a) {
        const int grow = static_cast<int>(std::ceil(margin_mm / geom.spacing[a]));
        out.lo[a] = std::max(0, box.lo[a] - grow);
        out.hi[a] = std::min(geom.dims[a] - 1, box.hi[a] + grow);
    }
    return out;
}

ScalarVolume crop(const ScalarVolume& vol, const VoxelBox& box) { return crop_impl(vol, box); }
LabelVolume crop(const LabelVolume& vol, const VoxelBox& box) { return crop_impl(vol, box); }

BinaryMask crop(const BinaryMask& mask, const VoxelBox& box) {
    BinaryMask out(cropped_geometry(mask.geom, box));
    const auto sz = box.size();
    for (int z = 0; z < sz[2]; ++z)
        for (int y = 0; y < sz[1]; ++y)
            for (int x = 0; x < sz[0]; ++x)
                out.set(x, y, z, mask.get(box.lo[0] + x, box.lo[1] + y, box.lo[2] + z));
    return out;
}

}  // namespace voxdet
