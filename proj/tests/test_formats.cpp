#include <cstring>
#include <filesystem>
#include <limits>
#include <set>

#include "doctest.h"
#include "rte/assembly.hpp"
#include "rte/atfps.hpp"
#include "rte/binary.hpp"
#include "rte/dataio.hpp"
#include "rte/error.hpp"
#include "rte/medium.hpp"
#include "rte/mgnet.hpp"
#include "rte/rng.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace rte;

namespace {

// Encoder written from the documented MGNW layout, independent of the library writer.
std::vector<std::uint8_t> encode_mgnw(const MgNetWeights& w) {
  std::vector<std::uint8_t> out;
  auto put = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  auto u32 = [&](std::uint32_t v) { put(&v, 4); };
  put("MGNW", 4);
  u32(w.version);
  u32(w.L);
  u32(w.C0);
  u32(w.M);
  u32(w.I);
  for (auto v : w.nu) u32(v);
  u32(std::uint32_t(w.tensors.size()));
  for (const auto& t : w.tensors) {
    u32(std::uint32_t(t.name.size()));
    put(t.name.data(), t.name.size());
    u32(std::uint32_t(t.dims.size()));
    for (auto d : t.dims) u32(d);
    put(t.data.data(), t.data.size() * 4);
  }
  return out;
}

LinearSystem small_system(int I, double delta = 0.0) {
  const Discretization d = discretize(sample_medium(Regime::Diffusion, 2, 6), I, make_quadrature(1, 0.0), nullptr, 1);
  const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 1.0);
  if (delta > 0) return assemble_compressed(compress(d, delta), d, bc);
  return assemble_full(d, bc);
}

}  // namespace

TEST_CASE("weights: L=3 C0=3 I=32 fixture loads and round-trips byte for byte") {
  TempDir tmp("weights");
  const MgNetWeights w = make_weights(3, 3, 1, 32, {2, 2, 2}, 1.0, 77);
  const std::string path = tmp.file("w.mgnw");
  write_weights(w, path);
  const auto bytes = read_file(path);
  CHECK(bytes == encode_mgnw(w));
  const MgNetWeights back = load_weights(path);
  CHECK(back.L == 3);
  CHECK(back.channels(2) == 12);
  CHECK(back.get("mg.restrict.1.weight").dims == std::vector<std::uint32_t>{12, 6, 3, 3});
  CHECK(back.get("mg.prolong.0.weight").dims == std::vector<std::uint32_t>{6, 3, 4, 4});
  CHECK(serialize_weights(back) == bytes);
}

TEST_CASE("weights: invalid files are rejected") {
  MgNetWeights w = make_weights(2, 3, 1, 8, {1, 1}, 1.0, 1);
  SUBCASE("restriction kernel of spatial size 5") {
    WeightTensor* t = w.find("mg.restrict.0.weight");
    t->dims = {6, 3, 5, 5};
    t->data.assign(6 * 3 * 25, 0.1f);
    try {
      parse_weights(encode_mgnw(w), "bad.mgnw");
      FAIL("expected rejection");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("mg.restrict.0.weight") != std::string::npos);
    }
  }
  SUBCASE("missing tensor") {
    w.tensors.pop_back();
    CHECK_THROWS_AS(parse_weights(encode_mgnw(w)), FormatError);
  }
  SUBCASE("duplicate tensor") {
    w.tensors.push_back(w.tensors.front());
    CHECK_THROWS_AS(parse_weights(encode_mgnw(w)), FormatError);
  }
  SUBCASE("non-finite value") {
    w.tensors[0].data[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(parse_weights(encode_mgnw(w)), FormatError);
  }
  SUBCASE("grid not divisible") {
    w.I = 6;
    w.L = 3;
    w.nu = {1, 1, 1};
    CHECK_THROWS_AS(parse_weights(encode_mgnw(w)), FormatError);
  }
  SUBCASE("trailing bytes and truncation") {
    auto bytes = encode_mgnw(w);
    bytes.push_back(0);
    CHECK_THROWS_AS(parse_weights(bytes), FormatError);
    bytes.resize(bytes.size() - 9);
    CHECK_THROWS_AS(parse_weights(bytes), FormatError);
  }
  SUBCASE("bad magic and version") {
    auto bytes = encode_mgnw(w);
    bytes[0] = 'X';
    CHECK_THROWS_AS(parse_weights(bytes), FormatError);
    bytes = encode_mgnw(w);
    bytes[4] = 9;
    CHECK_THROWS_AS(parse_weights(bytes), FormatError);
  }
  CHECK_THROWS_AS(load_weights("/nonexistent/w.mgnw"), IoError);
}

TEST_CASE("system files round-trip bitwise and keep the matvec") {
  for (double delta : {0.0, 1e-4}) {
    const LinearSystem s = small_system(delta > 0 ? 4 : 2, delta);
    const auto bytes = serialize_system(s);
    const LinearSystem t = parse_system(bytes);
    CHECK(serialize_system(t) == bytes);
    CHECK(t.compressed == (delta > 0));
    CHECK(t.delta == s.delta);
    CHECK(t.row_owner == s.row_owner);
    CHECK(t.cell_col_offset == s.cell_col_offset);
    Rng rng(4);
    Eigen::VectorXd x(s.size());
    for (auto& v : x) v = rng.normal();
    CHECK((Eigen::MatrixXd(s.A) * x - t.A * x).cwiseAbs().maxCoeff() <= 1e-12);
    // Header decoded by hand.
    REQUIRE(bytes.size() > 28);
    CHECK(std::memcmp(bytes.data(), "RTES", 4) == 0);
    std::uint32_t version, flags, M, I;
    double dl;
    std::memcpy(&version, &bytes[4], 4);
    std::memcpy(&flags, &bytes[8], 4);
    std::memcpy(&M, &bytes[12], 4);
    std::memcpy(&I, &bytes[16], 4);
    std::memcpy(&dl, &bytes[20], 8);
    CHECK(version == 1);
    CHECK(flags == (delta > 0 ? 1u : 0u));
    CHECK(M == 1);
    CHECK(int(I) == s.I);
    CHECK(dl == s.delta);
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + bytes.size() / 2);
    CHECK_THROWS_AS(parse_system(cut), FormatError);
  }
}

TEST_CASE("operator and flux files round-trip") {
  const LinearSystem s = small_system(2);
  SparseOperator op{"D", s.A, Eigen::VectorXd::LinSpaced(s.size(), 0, 1)};
  const auto bytes = serialize_operator(op);
  const SparseOperator back = parse_operator(bytes);
  CHECK(back.kind == "D");
  CHECK(serialize_operator(back) == bytes);
  CHECK((back.offset - op.offset).cwiseAbs().maxCoeff() == 0.0);
  SparseOperator plain{"Pi", s.A, {}};
  CHECK(parse_operator(serialize_operator(plain)).offset.size() == 0);

  std::vector<FluxGrid> grids(3, FluxGrid(4, 2));
  for (int g = 0; g < 3; ++g)
    for (std::size_t i = 0; i < grids[g].data.size(); ++i) grids[g].data[i] = g * 100.0 + i;
  const auto fb = serialize_flux(grids);
  const auto fg = parse_flux(fb);
  REQUIRE(fg.size() == 3);
  CHECK(fg[2].data == grids[2].data);
  CHECK(serialize_flux(fg) == fb);
  auto bad = fb;
  bad.resize(bad.size() - 8);
  CHECK_THROWS_AS(parse_flux(bad), FormatError);
}

TEST_CASE("dataset split, test disjointness and reproducibility") {
  DatasetConfig cfg;
  cfg.I = 32;
  cfg.n_rhs = 100;
  cfg.n_media = 10;
  cfg.n_test = 10;
  cfg.seed = 42;
  const Dataset ds = generate_dataset(cfg);
  CHECK(ds.count("train") == 80);
  CHECK(ds.count("val") == 20);
  CHECK(ds.count("test") == 10);
  CHECK(ds.rhs_length == 8 * 32 * 32);
  std::set<int> trainval_media, test_media;
  std::set<std::uint64_t> trainval_seeds;
  for (const auto& s : ds.samples) (s.split == "test" ? test_media : trainval_media).insert(s.medium);
  for (int m : trainval_media) {
    CHECK(ds.media[m].split == "trainval");
    trainval_seeds.insert(ds.media[m].field.seed);
  }
  for (int m : test_media) {
    CHECK(trainval_media.count(m) == 0);
    CHECK(ds.media[m].split == "test");
    CHECK(trainval_seeds.count(ds.media[m].field.seed) == 0);
  }
  CHECK(test_media.size() == 10);

  TempDir a("ds_a"), b("ds_b");
  write_dataset(ds, a.path());
  write_dataset(generate_dataset(cfg), b.path());
  for (const char* f : {"manifest.json", "rhs.bin"}) CHECK(read_file(a.file(f)) == read_file(b.file(f)));
  const Dataset back = load_dataset(a.path());
  CHECK(back.samples.size() == ds.samples.size());
  CHECK((back.rhs[17] - ds.rhs[17]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(manifest_json(back).dump() == manifest_json(ds).dump());
}

TEST_CASE("dataset loader rejects inconsistent files") {
  DatasetConfig cfg;
  cfg.I = 4;
  cfg.n_rhs = 10;
  cfg.n_media = 2;
  cfg.n_test = 1;
  TempDir tmp("ds_bad");
  write_dataset(generate_dataset(cfg), tmp.path());
  auto rhs = read_file(tmp.file("rhs.bin"));
  rhs.pop_back();
  write_file(tmp.file("rhs.bin"), rhs);
  CHECK_THROWS_AS(load_dataset(tmp.path()), FormatError);
  write_text_file(tmp.file("manifest.json"), "{ not json");
  CHECK_THROWS_AS(load_dataset(tmp.path()), FormatError);
  CHECK_THROWS_AS(load_dataset(tmp.file("missing")), IoError);
  cfg.delta = 1.5;
  CHECK_THROWS_AS(generate_dataset(cfg), ConfigError);
}

TEST_CASE("media serialize through JSON exactly") {
  const MediumField f = sample_medium(Regime::InterfaceCenterOut, 3, 55);
  const MediumField g = medium_from_json(medium_json(f));
  for (double x : {0.1, 0.5, 0.93})
    for (double y : {0.2, 0.77}) {
      CHECK(g.sigma_t(x, y) == f.sigma_t(x, y));
      CHECK(g.sigma_a(x, y) == f.sigma_a(x, y));
      CHECK(g.epsilon(x, y) == f.epsilon(x, y));
    }
}
