#pragma once

#include <cstdint>
#include <string>

#include "navguide/denoiser.hpp"
#include "navguide/diffusion.hpp"
#include "navguide/geometry.hpp"

namespace navguide {

struct Checkpoint {
  ArchDescriptor arch;
  NormSpec norm;
  NoiseSchedule sched;
  DenoiserParams params;
};

// Binary model file (magic "NDIF"): descriptor + normalization + schedule +
// flat little-endian f32 parameter payload + trailing CRC32. Parameters are
// quantized through f32 on save, so save -> load -> save is byte-stable.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

}  // namespace navguide
