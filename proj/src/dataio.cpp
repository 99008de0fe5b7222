#include "rte/dataio.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "rte/atfps.hpp"
#include "rte/binary.hpp"
#include "rte/error.hpp"
#include "rte/rng.hpp"

namespace rte {

namespace {

constexpr std::uint32_t kSystemVersion = 1;
constexpr std::uint32_t kOperatorVersion = 1;
constexpr std::uint32_t kFluxVersion = 1;
constexpr int kDatasetVersion = 1;
constexpr std::uint32_t kFlagCompressed = 1;

void put_magic(BinaryWriter& out, const char* m) { out.bytes(m, 4); }

void check_magic(BinaryReader& in, const char* m) {
  char got[4];
  in.bytes(got, 4, "magic");
  if (std::string(got, 4) != std::string(m, 4)) in.fail(std::string("bad magic, expected ") + std::string(m, 4));
}

void put_csr(BinaryWriter& out, const SparseMatrix& A) {
  if (!A.isCompressed()) throw ConfigError("sparse export requires a compressed matrix");
  out.u64(static_cast<std::uint64_t>(A.rows()));
  out.u64(static_cast<std::uint64_t>(A.cols()));
  out.u64(static_cast<std::uint64_t>(A.nonZeros()));
  for (Eigen::Index r = 0; r <= A.rows(); ++r) out.u64(static_cast<std::uint64_t>(A.outerIndexPtr()[r]));
  for (Eigen::Index k = 0; k < A.nonZeros(); ++k) out.i32(A.innerIndexPtr()[k]);
  for (Eigen::Index k = 0; k < A.nonZeros(); ++k) out.f64(A.valuePtr()[k]);
}

SparseMatrix get_csr(BinaryReader& in) {
  const std::uint64_t rows = in.u64("rows");
  const std::uint64_t cols = in.u64("cols");
  const std::uint64_t nnz = in.u64("nnz");
  constexpr std::uint64_t kLimit = std::uint64_t(1) << 31;
  if (rows >= kLimit || cols >= kLimit || nnz >= kLimit) in.fail("matrix dimensions out of range");
  if ((rows + 1) * 8 + nnz * 12 > in.remaining()) in.fail("matrix payload truncated");
  std::vector<int> outer(rows + 1), inner(nnz);
  std::vector<double> values(nnz);
  for (auto& v : outer) {
    const std::uint64_t o = in.u64("row_ptr");
    if (o > nnz) in.fail("row_ptr entry exceeds nnz");
    v = static_cast<int>(o);
  }
  if (outer.front() != 0 || static_cast<std::uint64_t>(outer.back()) != nnz) in.fail("row_ptr does not span [0, nnz]");
  for (auto& v : inner) v = in.i32("col_idx");
  for (auto& v : values) v = in.f64("values");
  for (std::uint64_t r = 0; r < rows; ++r) {
    if (outer[r + 1] < outer[r]) in.fail("row_ptr is not monotone at row " + std::to_string(r));
    for (int k = outer[r]; k < outer[r + 1]; ++k) {
      if (inner[k] < 0 || static_cast<std::uint64_t>(inner[k]) >= cols)
        in.fail("column index out of range in row " + std::to_string(r));
      if (k > outer[r] && inner[k] <= inner[k - 1]) in.fail("column indices not strictly increasing in row " + std::to_string(r));
    }
  }
  SparseMatrix A = Eigen::Map<const SparseMatrix>(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                                                  static_cast<Eigen::Index>(nnz), outer.data(), inner.data(),
                                                  values.data());
  A.makeCompressed();
  return A;
}

void put_ints(BinaryWriter& out, const std::vector<int>& v) {
  for (int x : v) out.i32(x);
}

std::vector<int> get_ints(BinaryReader& in, std::size_t n, const char* field) {
  if (n * 4 > in.remaining()) in.fail(std::string(field) + " truncated");
  std::vector<int> v(n);
  for (auto& x : v) x = in.i32(field);
  return v;
}

void put_vec(BinaryWriter& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out.f64(v(i));
}

Eigen::VectorXd get_vec(BinaryReader& in, std::size_t n, const char* field) {
  if (n * 8 > in.remaining()) in.fail(std::string(field) + " truncated");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = in.f64(field);
  return v;
}

Json poly_json(const ProductPolynomial& p) { return Json{{"cx", p.cx}, {"cy", p.cy}, {"shift", p.shift}}; }

ProductPolynomial poly_from_json(const Json& j) {
  ProductPolynomial p;
  p.cx = j.at("cx").get<std::vector<double>>();
  p.cy = j.at("cy").get<std::vector<double>>();
  p.shift = j.at("shift").get<double>();
  return p;
}

Json config_json(const DatasetConfig& c) {
  return Json{{"I", c.I},
              {"M", c.M},
              {"g", c.g},
              {"regime", c.regime},
              {"degree", c.degree},
              {"n_rhs", c.n_rhs},
              {"n_media", c.n_media},
              {"n_test", c.n_test},
              {"seed", c.seed},
              {"delta", c.delta},
              {"export_systems", c.export_systems}};
}

DatasetConfig config_from_json(const Json& j) {
  DatasetConfig c;
  c.I = j.at("I").get<int>();
  c.M = j.at("M").get<int>();
  c.g = j.at("g").get<double>();
  c.regime = j.at("regime").get<std::string>();
  c.degree = j.at("degree").get<int>();
  c.n_rhs = j.at("n_rhs").get<int>();
  c.n_media = j.at("n_media").get<int>();
  c.n_test = j.at("n_test").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.delta = j.at("delta").get<double>();
  c.export_systems = j.at("export_systems").get<bool>();
  return c;
}

void validate_config(const DatasetConfig& c) {
  if (c.I < 1) throw ConfigError("dataset: I must be positive");
  if (c.M < 1 || c.M > 3) throw ConfigError("dataset: M must be in 1..3");
  if (!(std::abs(c.g) < 1.0)) throw ConfigError("dataset: |g| must be < 1");
  parse_regime(c.regime);
  if (c.degree < 0 || c.degree > 4) throw ConfigError("dataset: degree must be 0 (random) or 1..4");
  if (c.n_rhs < 1 || c.n_media < 1 || c.n_test < 0) throw ConfigError("dataset: counts must be positive");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("dataset: delta must lie in (0, 1)");
}

std::string medium_dir(int id) { return "media/m" + std::to_string(id); }

void export_medium(const Dataset& ds, const MediumRecord& rec, const std::filesystem::path& dir) {
  const DatasetConfig& c = ds.config;
  const Discretization disc = discretize(rec.field, c.I, make_quadrature(c.M, c.g));
  const BoundaryData bc = BoundaryData::constant(disc.mesh, disc.quad, 0.0);
  const LinearSystem full = assemble_full(disc, bc);
  const CompressionIndex idx = compress(disc, c.delta);
  const LinearSystem comp = assemble_compressed(idx, disc, bc);
  const CoefficientFit D(disc);
  const CoefficientFit Dd(disc, &idx.selected);
  const auto out = dir / medium_dir(rec.id);
  std::filesystem::create_directories(out);
  write_system(full, (out / "full.rtes").string());
  write_system(comp, (out / "delta.rtes").string());
  write_operator({"D", D.matrix(), D.offset()}, (out / "D.rteo").string());
  write_operator({"D_delta", Dd.matrix(), Dd.offset()}, (out / "D_delta.rteo").string());
  write_operator({"Pi", projection_matrix(idx, disc), {}}, (out / "Pi.rteo").string());
}

}  // namespace

std::vector<std::uint8_t> serialize_system(const LinearSystem& sys) {
  const Eigen::Index n = sys.size();
  if (sys.A.rows() != n || sys.A.cols() != n || static_cast<Eigen::Index>(sys.row_interface.size()) != n ||
      static_cast<Eigen::Index>(sys.row_local.size()) != n || static_cast<Eigen::Index>(sys.row_owner.size()) != n ||
      static_cast<Eigen::Index>(sys.col_mode.size()) != n || sys.cell_col_offset.empty())
    throw ConfigError("serialize_system: inconsistent system metadata");
  BinaryWriter out;
  put_magic(out, "RTES");
  out.u32(kSystemVersion);
  out.u32(sys.compressed ? kFlagCompressed : 0);
  out.u32(static_cast<std::uint32_t>(sys.M));
  out.u32(static_cast<std::uint32_t>(sys.I));
  out.f64(sys.delta);
  put_csr(out, sys.A);
  put_vec(out, sys.b);
  put_ints(out, sys.row_interface);
  put_ints(out, sys.row_local);
  put_ints(out, sys.row_owner);
  out.u32(static_cast<std::uint32_t>(sys.cells()));
  put_ints(out, sys.cell_col_offset);
  put_ints(out, sys.col_mode);
  return out.take();
}

LinearSystem parse_system(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  BinaryReader in(bytes, source);
  check_magic(in, "RTES");
  const std::uint32_t version = in.u32("version");
  if (version != kSystemVersion) in.fail("unsupported system version " + std::to_string(version));
  LinearSystem sys;
  const std::uint32_t flags = in.u32("flags");
  if (flags & ~kFlagCompressed) in.fail("unknown flag bits");
  sys.compressed = flags & kFlagCompressed;
  sys.M = static_cast<int>(in.u32("M"));
  sys.I = static_cast<int>(in.u32("I"));
  if (sys.M < 1 || sys.M > 3 || sys.I < 1 || sys.I > 4096) in.fail("M or I out of range");
  sys.delta = in.f64("delta");
  sys.A = get_csr(in);
  if (sys.A.rows() != sys.A.cols()) in.fail("system matrix is not square");
  const std::size_t n = static_cast<std::size_t>(sys.A.rows());
  sys.b = get_vec(in, n, "b");
  sys.row_interface = get_ints(in, n, "row_interface");
  sys.row_local = get_ints(in, n, "row_local");
  sys.row_owner = get_ints(in, n, "row_owner");
  const std::uint32_t cells = in.u32("cells");
  if (cells != std::uint32_t(sys.I) * std::uint32_t(sys.I)) in.fail("cell count does not equal I^2");
  sys.cell_col_offset = get_ints(in, cells + 1, "cell_col_offset");
  sys.col_mode = get_ints(in, n, "col_mode");
  if (!in.at_end()) in.fail("trailing bytes");
  if (sys.cell_col_offset.front() != 0 || static_cast<std::size_t>(sys.cell_col_offset.back()) != n)
    in.fail("cell_col_offset does not span the columns");
  for (std::uint32_t c = 0; c < cells; ++c)
    if (sys.cell_col_offset[c + 1] < sys.cell_col_offset[c]) in.fail("cell_col_offset not monotone");
  for (std::size_t r = 0; r < n; ++r) {
    if (sys.row_owner[r] < 0 || static_cast<std::uint32_t>(sys.row_owner[r]) >= cells) in.fail("row_owner out of range");
    if (sys.row_local[r] < 0 || sys.row_local[r] >= 4 * sys.M) in.fail("row_local out of range");
  }
  return sys;
}

void write_system(const LinearSystem& sys, const std::string& path) { write_file(path, serialize_system(sys)); }
LinearSystem read_system(const std::string& path) { return parse_system(read_file(path), path); }

std::vector<std::uint8_t> serialize_operator(const SparseOperator& op) {
  if (op.offset.size() != 0 && op.offset.size() != op.A.rows())
    throw ConfigError("serialize_operator: offset length does not match rows");
  BinaryWriter out;
  put_magic(out, "RTEO");
  out.u32(kOperatorVersion);
  out.str(op.kind);
  put_csr(out, op.A);
  out.u64(static_cast<std::uint64_t>(op.offset.size()));
  put_vec(out, op.offset);
  return out.take();
}

SparseOperator parse_operator(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  BinaryReader in(bytes, source);
  check_magic(in, "RTEO");
  const std::uint32_t version = in.u32("version");
  if (version != kOperatorVersion) in.fail("unsupported operator version " + std::to_string(version));
  SparseOperator op;
  op.kind = in.str("kind", 64);
  op.A = get_csr(in);
  const std::uint64_t n = in.u64("offset length");
  if (n != 0 && n != static_cast<std::uint64_t>(op.A.rows())) in.fail("offset length does not match rows");
  op.offset = get_vec(in, n, "offset");
  if (!in.at_end()) in.fail("trailing bytes");
  return op;
}

void write_operator(const SparseOperator& op, const std::string& path) { write_file(path, serialize_operator(op)); }
SparseOperator read_operator(const std::string& path) { return parse_operator(read_file(path), path); }

std::vector<std::uint8_t> serialize_flux(const std::vector<FluxGrid>& grids) {
  const int ch = grids.empty() ? 0 : grids[0].channels;
  const int I = grids.empty() ? 0 : grids[0].I;
  BinaryWriter out;
  put_magic(out, "RTEF");
  out.u32(kFluxVersion);
  out.u32(static_cast<std::uint32_t>(grids.size()));
  out.u32(static_cast<std::uint32_t>(ch));
  out.u32(static_cast<std::uint32_t>(I));
  for (const auto& g : grids) {
    if (g.channels != ch || g.I != I || g.data.size() != std::size_t(ch) * I * I)
      throw ConfigError("serialize_flux: grids differ in shape");
    for (double v : g.data) out.f64(v);
  }
  return out.take();
}

std::vector<FluxGrid> parse_flux(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  BinaryReader in(bytes, source);
  check_magic(in, "RTEF");
  const std::uint32_t version = in.u32("version");
  if (version != kFluxVersion) in.fail("unsupported flux version " + std::to_string(version));
  const std::uint32_t count = in.u32("count");
  const std::uint32_t ch = in.u32("channels");
  const std::uint32_t I = in.u32("I");
  if (ch > 64 || I > 4096) in.fail("flux shape out of range");
  const std::uint64_t per = std::uint64_t(ch) * I * I;
  if (per * count * 8 != in.remaining()) in.fail("payload size does not match count x channels x I x I");
  std::vector<FluxGrid> out;
  out.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    FluxGrid g(static_cast<int>(ch), static_cast<int>(I));
    for (auto& v : g.data) v = in.f64("flux data");
    out.push_back(std::move(g));
  }
  return out;
}

void write_flux(const std::vector<FluxGrid>& grids, const std::string& path) { write_file(path, serialize_flux(grids)); }
std::vector<FluxGrid> read_flux(const std::string& path) { return parse_flux(read_file(path), path); }

std::size_t Dataset::count(const std::string& split) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [&](const SampleRecord& s) { return s.split == split; }));
}

Json medium_json(const MediumField& f) {
  return Json{{"regime", regime_tag(f.regime)}, {"degree", f.degree},       {"seed", f.seed},
              {"sigma_t", poly_json(f.sigma_t)}, {"sigma_a", poly_json(f.sigma_a)}, {"eps_param", f.eps_param},
              {"eps_fixed", f.eps_fixed},       {"source", f.source}};
}

MediumField medium_from_json(const Json& j) {
  MediumField f;
  f.regime = parse_regime(j.at("regime").get<std::string>());
  f.degree = j.at("degree").get<int>();
  f.seed = j.at("seed").get<std::uint64_t>();
  f.sigma_t = poly_from_json(j.at("sigma_t"));
  f.sigma_a = poly_from_json(j.at("sigma_a"));
  f.eps_param = j.at("eps_param").get<double>();
  f.eps_fixed = j.at("eps_fixed").get<double>();
  f.source = j.at("source").get<double>();
  return f;
}

Dataset generate_dataset(const DatasetConfig& config) {
  validate_config(config);
  Dataset ds;
  ds.config = config;
  const Regime regime = parse_regime(config.regime);
  ds.rhs_length = Eigen::Index(8) * config.M * config.I * config.I;

  Rng degree_rng(derive_seed(config.seed, 1));
  const int total_media = config.n_media + config.n_test;
  for (int m = 0; m < total_media; ++m) {
    const int degree = config.degree > 0 ? config.degree : 1 + static_cast<int>(degree_rng.index(4));
    const std::uint64_t seed = derive_seed(config.seed, 1000000 + static_cast<std::uint64_t>(m));
    ds.media.push_back({m, m < config.n_media ? "trainval" : "test", sample_medium(regime, degree, seed)});
  }

  const int total_rhs = config.n_rhs + config.n_test;
  for (int r = 0; r < total_rhs; ++r) {
    Rng rng(derive_seed(config.seed, 2000000 + static_cast<std::uint64_t>(r)));
    Eigen::VectorXd v(ds.rhs_length);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    ds.rhs.push_back(std::move(v));
  }

  // Pair every train/val rhs with a random train/val medium, shuffle, split 4:1.
  Rng pair_rng(derive_seed(config.seed, 2));
  std::vector<int> order(config.n_rhs);
  std::iota(order.begin(), order.end(), 0);
  for (int i = config.n_rhs - 1; i > 0; --i)
    std::swap(order[i], order[pair_rng.index(static_cast<std::uint64_t>(i) + 1)]);
  const int n_train = config.n_rhs - config.n_rhs / 5;
  for (int s = 0; s < config.n_rhs; ++s) {
    const int medium = static_cast<int>(pair_rng.index(static_cast<std::uint64_t>(config.n_media)));
    ds.samples.push_back({s, s < n_train ? "train" : "val", medium, order[s]});
  }
  for (int t = 0; t < config.n_test; ++t)
    ds.samples.push_back({config.n_rhs + t, "test", config.n_media + t, config.n_rhs + t});
  return ds;
}

Json manifest_json(const Dataset& ds) {
  Json j;
  j["format"] = "rte-dataset";
  j["version"] = kDatasetVersion;
  j["config"] = config_json(ds.config);
  j["rhs_distribution"] = "iid standard normal over all full-system rows";
  j["counts"] = Json{{"media", ds.media.size()},
                     {"rhs", ds.rhs.size()},
                     {"train", ds.count("train")},
                     {"val", ds.count("val")},
                     {"test", ds.count("test")}};
  j["rhs_file"] = Json{{"path", "rhs.bin"},
                       {"dtype", "float64-le"},
                       {"shape", {ds.rhs.size(), ds.rhs_length}},
                       {"bytes", ds.rhs.size() * std::size_t(ds.rhs_length) * 8}};
  Json media = Json::array();
  for (const auto& m : ds.media) {
    Json e{{"id", m.id}, {"split", m.split}, {"medium", medium_json(m.field)}};
    if (ds.config.export_systems) {
      const std::string d = medium_dir(m.id);
      e["files"] = Json{{"full_system", d + "/full.rtes"},
                        {"delta_system", d + "/delta.rtes"},
                        {"D", d + "/D.rteo"},
                        {"D_delta", d + "/D_delta.rteo"},
                        {"Pi", d + "/Pi.rteo"}};
    }
    media.push_back(std::move(e));
  }
  j["media"] = std::move(media);
  Json samples = Json::array();
  for (const auto& s : ds.samples)
    samples.push_back(Json{{"id", s.id}, {"split", s.split}, {"medium", s.medium}, {"rhs", s.rhs}});
  j["samples"] = std::move(samples);
  return j;
}

void write_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir + ": " + ec.message());
  BinaryWriter out;
  for (const auto& v : ds.rhs) {
    if (v.size() != ds.rhs_length) throw ConfigError("write_dataset: rhs vectors differ in length");
    put_vec(out, v);
  }
  write_file((fs::path(dir) / "rhs.bin").string(), out.buffer());
  write_text_file((fs::path(dir) / "manifest.json").string(), manifest_json(ds).dump(2) + "\n");
  if (ds.config.export_systems)
    for (const auto& m : ds.media) export_medium(ds, m, fs::path(dir));
}

Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string mpath = (fs::path(dir) / "manifest.json").string();
  Json j;
  try {
    j = Json::parse(read_text_file(mpath));
  } catch (const Json::parse_error& e) {
    throw FormatError(mpath + ": " + e.what());
  }
  Dataset ds;
  try {
    if (j.at("format").get<std::string>() != "rte-dataset") throw FormatError(mpath + ": not an rte dataset manifest");
    if (j.at("version").get<int>() != kDatasetVersion)
      throw FormatError(mpath + ": unsupported dataset version " + std::to_string(j.at("version").get<int>()));
    ds.config = config_from_json(j.at("config"));
    for (const auto& e : j.at("media"))
      ds.media.push_back({e.at("id").get<int>(), e.at("split").get<std::string>(), medium_from_json(e.at("medium"))});
    for (const auto& e : j.at("samples"))
      ds.samples.push_back({e.at("id").get<int>(), e.at("split").get<std::string>(), e.at("medium").get<int>(),
                            e.at("rhs").get<int>()});
    const auto& rf = j.at("rhs_file");
    const auto shape = rf.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw FormatError(mpath + ": rhs shape must have two entries");
    ds.rhs_length = static_cast<Eigen::Index>(shape[1]);
    const auto bytes = read_file((fs::path(dir) / rf.at("path").get<std::string>()).string());
    if (bytes.size() != shape[0] * shape[1] * 8)
      throw FormatError(mpath + ": rhs file holds " + std::to_string(bytes.size()) + " bytes, descriptor expects " +
                        std::to_string(shape[0] * shape[1] * 8));
    BinaryReader in(bytes, "rhs.bin");
    for (std::size_t r = 0; r < shape[0]; ++r) ds.rhs.push_back(get_vec(in, shape[1], "rhs"));
    const auto& counts = j.at("counts");
    if (counts.at("media").get<std::size_t>() != ds.media.size() || counts.at("rhs").get<std::size_t>() != ds.rhs.size() ||
        counts.at("train").get<std::size_t>() != ds.count("train") ||
        counts.at("val").get<std::size_t>() != ds.count("val") || counts.at("test").get<std::size_t>() != ds.count("test"))
      throw FormatError(mpath + ": manifest counts do not match the records");
    for (const auto& s : ds.samples)
      if (s.medium < 0 || s.medium >= static_cast<int>(ds.media.size()) || s.rhs < 0 ||
          s.rhs >= static_cast<int>(ds.rhs.size()))
        throw FormatError(mpath + ": sample " + std::to_string(s.id) + " references a missing medium or rhs");
  } catch (const Json::exception& e) {
    throw FormatError(mpath + ": " + e.what());
  }
  return ds;
}

Json report_json(const SolveReport& rep) {
  return Json{{"iterations", rep.iterations},   {"restarts", rep.restarts},
              {"converged", rep.converged},     {"breakdown", rep.breakdown},
              {"final_residual", rep.final_residual}, {"wall_seconds", rep.wall_seconds},
              {"preconditioner", rep.preconditioner}, {"history", rep.history}};
}

}  // namespace rte
