#pragma once

#include <cmath>
#include <cstdint>

#include "sweeplio/geometry.hpp"

namespace sweeplio {

// Voxel index = floor(coord / voxel_size) per axis, packed into a 64-bit key
// with 21 bits per axis in two's complement. Usable coordinate range is
// +-2^20 cells per axis.
inline int64_t voxel_coord(double x, double voxel_size) {
  return static_cast<int64_t>(std::floor(x / voxel_size));
}

inline uint64_t pack_voxel(int64_t ix, int64_t iy, int64_t iz) {
  constexpr uint64_t mask = (1ull << 21) - 1;
  return ((static_cast<uint64_t>(ix) & mask) << 42) |
         ((static_cast<uint64_t>(iy) & mask) << 21) |
         (static_cast<uint64_t>(iz) & mask);
}

inline void unpack_voxel(uint64_t key, int64_t& ix, int64_t& iy, int64_t& iz) {
  constexpr uint64_t mask = (1ull << 21) - 1;
  auto sign_extend = [](uint64_t v) {
    // 21-bit two's complement
    return (v & (1ull << 20)) ? static_cast<int64_t>(v | ~mask)
                              : static_cast<int64_t>(v);
  };
  ix = sign_extend((key >> 42) & mask);
  iy = sign_extend((key >> 21) & mask);
  iz = sign_extend(key & mask);
}

inline uint64_t voxel_key(const Vec3& p, double voxel_size) {
  return pack_voxel(voxel_coord(p.x(), voxel_size),
                    voxel_coord(p.y(), voxel_size),
                    voxel_coord(p.z(), voxel_size));
}

}  // namespace sweeplio
