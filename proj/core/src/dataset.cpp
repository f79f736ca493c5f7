#include "semipso/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "semipso/error.hpp"
#include "semipso/image_io.hpp"
#include "semipso/rng.hpp"

namespace semipso {

void Dataset::validate() const {
  std::vector<int> seen(items.size(), 0);
  for (const auto* pool : {&labeled, &unlabeled}) {
    for (std::size_t i : *pool) {
      require(i < items.size(), ErrorCode::kInvalidArgument, "partition index out of range");
      ++seen[i];
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    require(seen[i] == 1, ErrorCode::kInvalidArgument,
            "labeled/unlabeled partition must cover each item exactly once (item " +
                std::to_string(i) + ")");
  }
  for (std::size_t i : labeled) {
    require(items[i].has_mask(), ErrorCode::kMissingMasks,
            "labeled item '" + items[i].name + "' has no mask");
  }
  for (const auto& s : items) {
    require(s.image.shape().n == 1 && s.image.shape().c == 3, ErrorCode::kShapeMismatch,
            "image '" + s.name + "' must be [1,3,h,w], got " + s.image.shape().str());
    if (!s.has_mask()) continue;
    require_same_shape(Shape4{1, 1, s.image.shape().h, s.image.shape().w}, s.mask.shape(),
                       "dataset mask");
    for (double v : s.mask.data()) {
      require(v == 0.0 || v == 1.0, ErrorCode::kInvalidArgument,
              "mask '" + s.name + "' is not binary");
    }
  }
}

bool Dataset::all_masked() const noexcept {
  return std::all_of(items.begin(), items.end(), [](const Sample& s) { return s.has_mask(); });
}

Dataset split_labeled(Dataset dataset, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::kInvalidArgument,
          "label fraction must lie in (0, 1], got " + std::to_string(fraction));
  const std::size_t n = dataset.items.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  // The small epsilon keeps e.g. 0.1 * 20 from rounding up to 3.
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  dataset.labeled.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  dataset.unlabeled.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  std::sort(dataset.labeled.begin(), dataset.labeled.end());
  std::sort(dataset.unlabeled.begin(), dataset.unlabeled.end());
  dataset.validate();
  return dataset;
}

Dataset all_labeled(Dataset dataset) {
  dataset.labeled.resize(dataset.items.size());
  std::iota(dataset.labeled.begin(), dataset.labeled.end(), std::size_t{0});
  dataset.unlabeled.clear();
  return dataset;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
  Dataset out;
  for (std::size_t i : indices) {
    require(i < dataset.items.size(), ErrorCode::kInvalidArgument, "subset index out of range");
    out.items.push_back(dataset.items[i]);
  }
  return all_labeled(std::move(out));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, '\t')) fields.push_back(f);
  return fields;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Dataset load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  require(in.good(), ErrorCode::kIoFailure, "cannot open manifest " + manifest.string());
  const std::filesystem::path base = manifest.parent_path();
  Dataset ds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    require(f.size() == 3 || f.size() == 4, ErrorCode::kInvalidArgument,
            manifest.string() + ":" + std::to_string(line_no) +
                ": expected image<TAB>mask<TAB>labeled[<TAB>eval_mask]");
    require(f[2] == "0" || f[2] == "1", ErrorCode::kInvalidArgument,
            manifest.string() + ":" + std::to_string(line_no) + ": labeled flag must be 0 or 1");
    Sample s;
    s.name = f[0];
    s.image = load_image<double>(resolve(base, f[0]));
    if (f[1] != "-") s.mask = load_image<double>(resolve(base, f[1]));
    if (f.size() == 4 && f[3] != "-") s.eval_mask = load_image<double>(resolve(base, f[3]));
    (f[2] == "1" ? ds.labeled : ds.unlabeled).push_back(ds.items.size());
    ds.items.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  dataset.validate();
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "masks");
  std::vector<int> is_labeled(dataset.items.size(), 0);
  for (std::size_t i : dataset.labeled) is_labeled[i] = 1;
  std::ofstream manifest(dir / "manifest.tsv", std::ios::trunc);
  require(manifest.good(), ErrorCode::kIoFailure, "cannot write manifest in " + dir.string());
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const Sample& s = dataset.items[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "%04zu", i);
    const std::string image_rel = std::string("images/") + stem + ".ppm";
    save_image(dir / image_rel, s.image);
    std::string mask_rel = "-";
    if (s.has_mask()) {
      mask_rel = std::string("masks/") + stem + ".pgm";
      save_image(dir / mask_rel, s.mask);
    }
    manifest << image_rel << '\t' << mask_rel << '\t' << is_labeled[i] << '\n';
  }
}

}  // namespace semipso
