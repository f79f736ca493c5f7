#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semipso/tensor.hpp"

namespace semipso {

struct Sample {
  Tensor4<double> image;      // [1,3,h,w] in [0,1]
  Tensor4<double> mask;       // [1,1,h,w] in {0,1}; empty when unknown
  Tensor4<double> eval_mask;  // optional region restricting evaluation
  std::string name;

  [[nodiscard]] bool has_mask() const noexcept { return !mask.empty(); }
};

/// Image/mask pairs with a labeled/unlabeled partition of the indices.
struct Dataset {
  std::vector<Sample> items;
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;

  [[nodiscard]] std::size_t size() const noexcept { return items.size(); }
  /// Partition is disjoint and covering, masks are binary, labeled items have masks.
  void validate() const;
  [[nodiscard]] bool all_masked() const noexcept;
};

/// Marks ceil(fraction * N) items labeled via a seeded shuffle; 0 < fraction <= 1.
Dataset split_labeled(Dataset dataset, double fraction, std::uint64_t seed);

/// Dataset with every item labeled (e.g. an evaluation set).
Dataset all_labeled(Dataset dataset);

/// Subset of the items, all marked labeled.
Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

/// Manifest: one item per line, tab-separated
///   image_path <TAB> mask_path|- <TAB> labeled(0|1) [<TAB> eval_mask_path]
/// Relative paths resolve against the manifest's directory.
Dataset load_manifest(const std::filesystem::path& manifest);

/// Writes images/, masks/ and manifest.tsv under `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

}  // namespace semipso
