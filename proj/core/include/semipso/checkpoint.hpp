#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "semipso/models.hpp"

namespace semipso {

/// Training snapshot: both networks with their Adam state, the iteration it
/// was taken at, and a `key = value` echo of the run configuration.
///
/// On disk (all integers and reals little-endian):
///   "SEMIPSO\0"  u32 version(=1)  u32 real_bytes(4|8)  i64 iteration
///   u32 len + config text
///   u32 group count; per group: u32 len + name, u32 param count;
///     per param: u32 len + name, i32 n,c,h,w, i64 adam_t,
///                value[numel], adam_m[numel], adam_v[numel]
template <Real T>
struct Checkpoint {
  std::string config_text;
  std::int64_t iteration = 0;
  ModelParams<T> segmenter;
  ModelParams<T> discriminator;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <Real T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& checkpoint);

/// Rejects files whose real width differs from sizeof(T).
template <Real T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

/// Real width (4 or 8) recorded in a checkpoint header.
int checkpoint_real_bytes(const std::filesystem::path& path);

}  // namespace semipso
