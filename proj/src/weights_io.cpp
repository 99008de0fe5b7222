#include <cmath>
#include <map>
#include <sstream>

#include "rte/binary.hpp"
#include "rte/error.hpp"
#include "rte/mgnet.hpp"
#include "rte/rng.hpp"

namespace rte {

namespace {

constexpr char kMagic[4] = {'M', 'G', 'N', 'W'};
constexpr std::uint32_t kMaxLevels = 8;
constexpr std::uint32_t kMaxRank = 4;

void add(std::vector<WeightTensor>& out, const std::string& name, std::uint32_t o, std::uint32_t i, std::uint32_t k) {
  out.push_back({name + ".weight", {o, i, k, k}, {}});
  out.push_back({name + ".bias", {o}, {}});
}

std::string dims_str(const std::vector<std::uint32_t>& d) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < d.size(); ++i) os << (i ? "," : "") << d[i];
  os << "]";
  return os.str();
}

}  // namespace

std::size_t WeightTensor::numel() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

const WeightTensor& MgNetWeights::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw ConfigError("weights: missing tensor " + name);
}

WeightTensor* MgNetWeights::find(const std::string& name) {
  for (auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::vector<WeightTensor> weight_layout(std::uint32_t L, std::uint32_t C0, std::uint32_t M) {
  std::vector<WeightTensor> out;
  auto C = [&](std::uint32_t l) { return C0 << l; };
  add(out, "coeff.in", C0, 3, 3);
  for (std::uint32_t l = 1; l < L; ++l) add(out, "coeff.down." + std::to_string(l), C(l), C(l - 1), 3);
  for (std::uint32_t l = 0; l < L; ++l) {
    add(out, "coeff.a." + std::to_string(l), C(l), C(l), 3);
    add(out, "coeff.ainv." + std::to_string(l), C(l), C(l), 3);
  }
  add(out, "mg.head_in", C0, 4 * M, 1);
  for (std::uint32_t l = 0; l < L; ++l) {
    add(out, "mg.A." + std::to_string(l), C(l), C(l), 3);
    add(out, "mg.B." + std::to_string(l), C(l), C(l), 3);
  }
  for (std::uint32_t l = 0; l + 1 < L; ++l) {
    add(out, "mg.restrict." + std::to_string(l), C(l + 1), C(l), 3);
    // transposed convolution: [in = C_{l+1}, out = C_l, 4, 4]
    add(out, "mg.prolong." + std::to_string(l), C(l + 1), C(l), 4);
  }
  add(out, "mg.head_out", 4 * M, C0, 1);
  return out;
}

void validate_weights(const MgNetWeights& w) {
  if (w.version != MgNetWeights::kVersion)
    throw FormatError("weights: unsupported version " + std::to_string(w.version));
  if (w.L < 1 || w.L > kMaxLevels) throw FormatError("weights: level count L=" + std::to_string(w.L) + " out of range");
  if (w.C0 < 1 || w.C0 > 256) throw FormatError("weights: base channel count C0=" + std::to_string(w.C0) + " out of range");
  if (w.M < 1 || w.M > 3) throw FormatError("weights: M=" + std::to_string(w.M) + " out of range");
  if (w.I < 1 || w.I % (1u << (w.L - 1)) != 0)
    throw FormatError("weights: grid size I=" + std::to_string(w.I) + " is not divisible by 2^(L-1)");
  if (w.nu.size() != w.L) throw FormatError("weights: smoothing step list does not have L entries");
  std::map<std::string, const WeightTensor*> by_name;
  for (const auto& t : w.tensors) {
    if (!by_name.emplace(t.name, &t).second) throw FormatError("weights: duplicate tensor " + t.name);
    if (t.data.size() != t.numel()) throw FormatError("weights: tensor " + t.name + " data size does not match dims");
  }
  const auto expected = weight_layout(w.L, w.C0, w.M);
  for (const auto& e : expected) {
    auto it = by_name.find(e.name);
    if (it == by_name.end()) throw FormatError("weights: missing tensor " + e.name);
    if (it->second->dims != e.dims)
      throw FormatError("weights: tensor " + e.name + " has shape " + dims_str(it->second->dims) + ", expected " +
                        dims_str(e.dims));
    for (float v : it->second->data)
      if (!std::isfinite(v)) throw FormatError("weights: tensor " + e.name + " contains non-finite values");
  }
  if (by_name.size() != expected.size()) {
    for (const auto& t : w.tensors) {
      bool known = false;
      for (const auto& e : expected) known = known || e.name == t.name;
      if (!known) throw FormatError("weights: unexpected tensor " + t.name);
    }
  }
}

MgNetWeights parse_weights(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  BinaryReader in(bytes, source);
  char magic[4];
  in.bytes(magic, 4, "magic");
  if (std::string(magic, 4) != std::string(kMagic, 4)) in.fail("bad magic, expected MGNW");
  MgNetWeights w;
  w.version = in.u32("version");
  if (w.version != MgNetWeights::kVersion) in.fail("unsupported version " + std::to_string(w.version));
  w.L = in.u32("L");
  w.C0 = in.u32("C0");
  w.M = in.u32("M");
  w.I = in.u32("I");
  if (w.L < 1 || w.L > kMaxLevels) in.fail("level count L=" + std::to_string(w.L) + " out of range");
  for (std::uint32_t l = 0; l < w.L; ++l) w.nu.push_back(in.u32("nu"));
  const std::uint32_t count = in.u32("tensor count");
  if (count > 4096) in.fail("tensor count " + std::to_string(count) + " out of range");
  for (std::uint32_t t = 0; t < count; ++t) {
    WeightTensor wt;
    wt.name = in.str("tensor name", 256);
    const std::uint32_t rank = in.u32("tensor rank");
    if (rank > kMaxRank) in.fail("tensor " + wt.name + " rank " + std::to_string(rank) + " out of range");
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      wt.dims.push_back(in.u32("tensor dims"));
      n *= wt.dims.back();
    }
    if (n * 4 > in.remaining()) in.fail("tensor " + wt.name + " data truncated");
    wt.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) wt.data[i] = in.f32("tensor data");
    w.tensors.push_back(std::move(wt));
  }
  if (!in.at_end()) in.fail("trailing bytes after last tensor");
  try {
    validate_weights(w);
  } catch (const FormatError& e) {
    throw FormatError(source + ": " + e.what());
  }
  return w;
}

MgNetWeights load_weights(const std::string& path) { return parse_weights(read_file(path), path); }

std::vector<std::uint8_t> serialize_weights(const MgNetWeights& w) {
  validate_weights(w);
  BinaryWriter out;
  out.bytes(kMagic, 4);
  out.u32(w.version);
  out.u32(w.L);
  out.u32(w.C0);
  out.u32(w.M);
  out.u32(w.I);
  for (auto v : w.nu) out.u32(v);
  out.u32(static_cast<std::uint32_t>(w.tensors.size()));
  for (const auto& t : w.tensors) {
    out.str(t.name);
    out.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) out.u32(d);
    for (float v : t.data) out.f32(v);
  }
  return out.take();
}

void write_weights(const MgNetWeights& w, const std::string& path) { write_file(path, serialize_weights(w)); }

MgNetWeights make_weights(std::uint32_t L, std::uint32_t C0, std::uint32_t M, std::uint32_t I,
                          std::vector<std::uint32_t> nu, double scale, std::uint64_t seed) {
  MgNetWeights w;
  w.L = L;
  w.C0 = C0;
  w.M = M;
  w.I = I;
  w.nu = std::move(nu);
  w.tensors = weight_layout(L, C0, M);
  Rng rng(seed);
  for (auto& t : w.tensors) {
    t.data.assign(t.numel(), 0.0f);
    if (scale == 0.0 || t.dims.size() != 4) continue;
    const double fan_in = double(t.dims[1]) * t.dims[2] * t.dims[3];
    const double sd = scale / std::sqrt(fan_in);
    for (auto& v : t.data) v = static_cast<float>(sd * rng.normal());
  }
  validate_weights(w);
  return w;
}

}  // namespace rte
