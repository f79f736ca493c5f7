#include "semipso/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <algorithm>
#include <fstream>
#include <iterator>
#include <vector>

#include "semipso/error.hpp"

namespace semipso {
namespace {

constexpr std::array<char, 8> kMagic{'S', 'E', 'M', 'I', 'P', 'S', 'O', '\0'};

template <typename U>
void put(std::vector<char>& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.insert(out.end(), bytes.begin(), bytes.end());
}

void put_string(std::vector<char>& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string origin)
      : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    std::array<char, sizeof(U)> b{};
    std::memcpy(b.data(), bytes_.data() + pos_, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    pos_ += sizeof(U);
    U value;
    std::memcpy(&value, b.data(), sizeof(U));
    return value;
  }

  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s(bytes_.data() + pos_, len);
    pos_ += len;
    return s;
  }

  void expect_end() const {
    require(pos_ == bytes_.size(), ErrorCode::kBadCheckpoint,
            origin_ + ": trailing bytes after checkpoint payload");
  }

 private:
  void need(std::size_t n) const {
    require(bytes_.size() - pos_ >= n, ErrorCode::kBadCheckpoint,
            origin_ + ": truncated checkpoint");
  }

  std::vector<char> bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIoFailure, "cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Reader open_checked(const std::filesystem::path& path) {
  Reader r(read_all(path), path.string());
  for (char c : kMagic) {
    require(r.get<char>() == c, ErrorCode::kBadCheckpoint, path.string() + ": not a checkpoint");
  }
  const auto version = r.get<std::uint32_t>();
  require(version == kCheckpointVersion, ErrorCode::kBadCheckpoint,
          path.string() + ": unsupported checkpoint version " + std::to_string(version));
  return r;
}

template <Real T>
void put_params(std::vector<char>& out, const std::string& group, const ModelParams<T>& params) {
  put_string(out, group);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.items) {
    put_string(out, p.name);
    const Shape4& s = p.value.shape();
    for (int d : {s.n, s.c, s.h, s.w}) put<std::int32_t>(out, d);
    put<std::int64_t>(out, p.adam.t);
    for (T v : p.value.data()) put<T>(out, v);
    const bool has_state = !p.adam.m.empty();
    for (std::size_t i = 0; i < p.value.numel(); ++i) put<T>(out, has_state ? p.adam.m[i] : T(0));
    for (std::size_t i = 0; i < p.value.numel(); ++i) put<T>(out, has_state ? p.adam.v[i] : T(0));
  }
}

template <Real T>
ModelParams<T> get_params(Reader& r, const std::string& expected_group) {
  const std::string group = r.get_string();
  require(group == expected_group, ErrorCode::kBadCheckpoint,
          "checkpoint group '" + group + "' where '" + expected_group + "' was expected");
  ModelParams<T> params;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedParam<T> p;
    p.name = r.get_string();
    Shape4 s;
    s.n = r.get<std::int32_t>();
    s.c = r.get<std::int32_t>();
    s.h = r.get<std::int32_t>();
    s.w = r.get<std::int32_t>();
    require(s.n >= 0 && s.c >= 0 && s.h >= 0 && s.w >= 0, ErrorCode::kBadCheckpoint,
            "negative tensor dimension in checkpoint");
    p.adam = AdamState<T>(s);
    p.adam.t = r.get<std::int64_t>();
    p.value = Tensor4<T>(s);
    for (auto& v : p.value.data()) v = r.get<T>();
    for (auto& v : p.adam.m.data()) v = r.get<T>();
    for (auto& v : p.adam.v.data()) v = r.get<T>();
    params.items.push_back(std::move(p));
  }
  return params;
}

}  // namespace

template <Real T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& checkpoint) {
  std::vector<char> out(kMagic.begin(), kMagic.end());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, sizeof(T));
  put<std::int64_t>(out, checkpoint.iteration);
  put_string(out, checkpoint.config_text);
  put<std::uint32_t>(out, 2);
  put_params(out, "segmenter", checkpoint.segmenter);
  put_params(out, "discriminator", checkpoint.discriminator);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  require(file.good(), ErrorCode::kIoFailure, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  require(file.good(), ErrorCode::kIoFailure, "short write to " + path.string());
}

template <Real T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  Reader r = open_checked(path);
  const auto width = r.get<std::uint32_t>();
  require(width == sizeof(T), ErrorCode::kBadCheckpoint,
          path.string() + ": checkpoint holds " + std::to_string(width) +
              "-byte reals, expected " + std::to_string(sizeof(T)));
  Checkpoint<T> ck;
  ck.iteration = r.get<std::int64_t>();
  ck.config_text = r.get_string();
  const auto groups = r.get<std::uint32_t>();
  require(groups == 2, ErrorCode::kBadCheckpoint, path.string() + ": expected 2 parameter groups");
  ck.segmenter = get_params<T>(r, "segmenter");
  ck.discriminator = get_params<T>(r, "discriminator");
  r.expect_end();
  return ck;
}

int checkpoint_real_bytes(const std::filesystem::path& path) {
  Reader r = open_checked(path);
  const auto width = r.get<std::uint32_t>();
  require(width == 4 || width == 8, ErrorCode::kBadCheckpoint,
          path.string() + ": invalid real width " + std::to_string(width));
  return static_cast<int>(width);
}

template void save_checkpoint(const std::filesystem::path&, const Checkpoint<float>&);
template void save_checkpoint(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint(const std::filesystem::path&);

}  // namespace semipso
