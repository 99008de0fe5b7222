// rte: dataset generation, solves, benchmarks and loss evaluation.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rte/atfps.hpp"
#include "rte/binary.hpp"
#include "rte/dataio.hpp"
#include "rte/error.hpp"
#include "rte/krylov.hpp"
#include "rte/mgnet.hpp"
#include "rte/parallel.hpp"

namespace fs = std::filesystem;
using namespace rte;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;
constexpr int kReportVersion = 1;

struct ProblemOpts {
  int I = 8;
  int M = 1;
  double g = 0.0;
  std::string regime = "diffusion";
  int degree = 2;
  std::uint64_t seed = 0;
  double bc = 0.0;
  double source = 1.0;
  std::string dataset;
  int sample = -1;
  int medium = -1;
};

struct SolverOpts {
  double tol = 1e-8;
  int restart = 50;
  int maxit = 5000;
  std::string precond = "none";
  std::optional<double> delta;
  int threads = 0;
};

void add_problem(CLI::App* app, ProblemOpts& p) {
  app->add_option("--I", p.I, "cells per axis")->check(CLI::PositiveNumber);
  app->add_option("--M", p.M, "directions per quadrant")->check(CLI::Range(1, kMaxQuadratureM));
  app->add_option("--g", p.g, "Henyey-Greenstein anisotropy");
  app->add_option("--regime", p.regime, "diffusion | transport | interface-1..6");
  app->add_option("--degree", p.degree, "polynomial degree of the random medium")->check(CLI::Range(1, 4));
  app->add_option("--seed", p.seed, "medium seed");
  app->add_option("--bc", p.bc, "constant inflow value");
  app->add_option("--source", p.source, "constant source q");
  app->add_option("--dataset", p.dataset, "dataset directory (overrides the inline problem)");
  app->add_option("--sample", p.sample, "dataset sample id (medium and rhs)");
  app->add_option("--medium", p.medium, "dataset medium id");
}

void add_solver(CLI::App* app, SolverOpts& s, bool with_precond = true) {
  app->add_option("--tol", s.tol, "relative tolerance")->check(CLI::PositiveNumber);
  app->add_option("--restart", s.restart, "GMRES restart length")->check(CLI::PositiveNumber);
  app->add_option("--maxit", s.maxit, "maximum total inner iterations")->check(CLI::NonNegativeNumber);
  if (with_precond) app->add_option("--precond", s.precond, "none | bjacobi | mgnet:<weights>");
  app->add_option("--delta", s.delta, "compress with tolerance delta in (0, 1)");
  app->add_option("--threads", s.threads, "worker threads (default: RTE_NUM_THREADS or hardware)");
}

Json problem_json(const ProblemOpts& p) {
  return Json{{"I", p.I},           {"M", p.M},           {"g", p.g},         {"regime", p.regime},
              {"degree", p.degree}, {"seed", p.seed},     {"bc", p.bc},       {"source", p.source},
              {"dataset", p.dataset}, {"sample", p.sample}, {"medium", p.medium}};
}

Json solver_json(const SolverOpts& s) {
  Json j{{"tol", s.tol}, {"restart", s.restart}, {"maxit", s.maxit}, {"precond", s.precond}, {"threads", s.threads}};
  j["delta"] = s.delta ? Json(*s.delta) : Json(nullptr);
  return j;
}

Json envelope(const std::string& command, Json config) {
  return Json{{"format", "rte-report"}, {"version", kReportVersion}, {"command", command}, {"config", std::move(config)}};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_json(const Json& j, const std::string& path) { write_text_file(path, j.dump(2) + "\n"); }

// One discretized problem, either inline or from a dataset, plus an optional algebraic rhs.
struct Problem {
  MediumField medium;
  int I = 0;
  int M = 1;
  double g = 0.0;
  double bc = 0.0;
  std::optional<Eigen::VectorXd> rhs;
};

Problem resolve_problem(const ProblemOpts& p) {
  Problem out;
  if (!p.dataset.empty()) {
    const Dataset ds = load_dataset(p.dataset);
    out.I = ds.config.I;
    out.M = ds.config.M;
    out.g = ds.config.g;
    out.bc = p.bc;
    int medium = p.medium;
    if (p.sample >= 0) {
      auto it = std::find_if(ds.samples.begin(), ds.samples.end(), [&](const SampleRecord& s) { return s.id == p.sample; });
      if (it == ds.samples.end()) throw ConfigError("dataset has no sample " + std::to_string(p.sample));
      medium = it->medium;
      out.rhs = ds.rhs[it->rhs];
    }
    if (medium < 0 || medium >= static_cast<int>(ds.media.size()))
      throw ConfigError("--dataset requires --sample or a valid --medium");
    out.medium = ds.media[medium].field;
    return out;
  }
  out.medium = sample_medium(parse_regime(p.regime), p.degree, p.seed);
  out.medium.source = p.source;
  out.I = p.I;
  out.M = p.M;
  out.g = p.g;
  out.bc = p.bc;
  return out;
}

struct Built {
  Discretization disc;
  BoundaryData bc;
  LinearSystem sys;
  std::optional<CompressionIndex> index;
};

Built build(const Problem& prob, const SolverOpts& s) {
  Built b{discretize(prob.medium, prob.I, make_quadrature(prob.M, prob.g), nullptr, s.threads), {}, {}, std::nullopt};
  b.bc = BoundaryData::constant(b.disc.mesh, b.disc.quad, prob.bc);
  if (s.delta) {
    b.index = compress(b.disc, *s.delta);
    b.sys = assemble_compressed(*b.index, b.disc, b.bc);
    if (prob.rhs) b.sys.b = project_rows(*b.index, b.disc, *prob.rhs);
  } else {
    b.sys = assemble_full(b.disc, b.bc);
    if (prob.rhs) {
      if (prob.rhs->size() != b.sys.size()) throw ConfigError("dataset rhs does not match the system size");
      b.sys.b = *prob.rhs;
    }
  }
  return b;
}

std::unique_ptr<Preconditioner> make_precond(const std::string& spec, const Built& b) {
  if (spec == "none") return nullptr;
  if (spec == "bjacobi") return std::make_unique<BlockJacobi>(b.sys);
  if (spec.rfind("mgnet:", 0) == 0) {
    const std::string path = spec.substr(6);
    auto w = std::make_shared<const MgNetWeights>(load_weights(path));
    auto p = std::make_unique<MgNetPreconditioner>(w, b.sys, b.disc, b.index ? &b.index->selected : nullptr);
    p->set_label(spec);
    return p;
  }
  throw ConfigError("unknown preconditioner '" + spec + "' (expected none, bjacobi or mgnet:<path>)");
}

int cmd_gen(const DatasetConfig& cfg, const std::string& out) {
  const Dataset ds = generate_dataset(cfg);
  write_dataset(ds, out);
  std::cout << "wrote dataset to " << out << ": " << ds.count("train") << " train, " << ds.count("val") << " val, "
            << ds.count("test") << " test samples over " << ds.media.size() << " media\n";
  return kExitOk;
}

int cmd_solve(const ProblemOpts& p, const SolverOpts& s, const std::string& out, bool verify) {
  const Problem prob = resolve_problem(p);
  const Built b = build(prob, s);
  const auto pre = make_precond(s.precond, b);
  const SolveResult res = gmres(b.sys, pre.get(), GmresOptions{s.tol, s.restart, s.maxit});

  Json rep = envelope("solve", Json{{"problem", problem_json(p)}, {"solver", solver_json(s)}});
  rep["system"] = Json{{"dimension", b.sys.size()},
                       {"full_dimension", b.disc.full_dimension()},
                       {"compressed", b.sys.compressed},
                       {"nnz", b.sys.A.nonZeros()}};
  rep["solve"] = report_json(res.report);

  Eigen::VectorXd alpha = res.x;
  if (b.index && !prob.rhs) alpha = reconstruct_layers(*b.index, b.disc, b.bc, res.x).alpha;
  if (verify) {
    const Eigen::VectorXd ref = solve_sparse_direct(b.sys);
    const double diff = (res.x - ref).cwiseAbs().maxCoeff();
    const double scale = ref.cwiseAbs().maxCoeff();
    rep["verify"] = Json{{"max_abs_diff", diff}, {"relative", scale > 0 ? diff / scale : diff}};
  }
  if (!out.empty()) {
    ensure_dir(out);
    if (!prob.rhs || !b.index) {
      const FluxGrid flux = center_flux(b.disc, alpha.size() == b.disc.full_dimension() ? alpha : res.x);
      write_flux({flux}, (fs::path(out) / "flux.rtef").string());
      rep["files"]["flux"] = "flux.rtef";
    }
    BinaryWriter w;
    for (Eigen::Index i = 0; i < res.x.size(); ++i) w.f64(res.x(i));
    write_file((fs::path(out) / "solution.f64").string(), w.buffer());
    rep["files"]["solution"] = Json{{"path", "solution.f64"}, {"dtype", "float64-le"}, {"length", res.x.size()}};
    write_json(rep, (fs::path(out) / "report.json").string());
  }
  std::cout << (res.report.converged ? "converged" : "NOT converged") << " in " << res.report.iterations
            << " iterations, relative residual " << res.report.final_residual << ", dimension " << b.sys.size();
  if (rep.contains("verify")) std::cout << ", oracle relative difference " << rep["verify"]["relative"].get<double>();
  std::cout << "\n";
  return res.report.converged ? kExitOk : kExitNumerical;
}

int cmd_bench(const std::string& dataset, std::vector<std::string> preconds, const SolverOpts& s,
              const std::string& split, const std::string& out) {
  if (preconds.empty()) preconds = {"none", "bjacobi"};
  const Dataset ds = load_dataset(dataset);
  std::vector<SampleRecord> samples;
  for (const auto& r : ds.samples)
    if (r.split == split) samples.push_back(r);
  if (samples.empty()) throw ConfigError("dataset has no '" + split + "' samples");

  struct Cell {
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
  };
  std::vector<std::vector<Cell>> table(samples.size(), std::vector<Cell>(preconds.size()));
  SolverOpts inner = s;
  inner.threads = 1;
  parallel_for(samples.size(), [&](std::size_t i) {
    ProblemOpts p;
    p.dataset = dataset;
    Problem prob;
    prob.medium = ds.media[samples[i].medium].field;
    prob.I = ds.config.I;
    prob.M = ds.config.M;
    prob.g = ds.config.g;
    prob.rhs = ds.rhs[samples[i].rhs];
    const Built b = build(prob, inner);
    for (std::size_t k = 0; k < preconds.size(); ++k) {
      const auto pre = make_precond(preconds[k], b);
      const SolveResult r = gmres(b.sys, pre.get(), GmresOptions{s.tol, s.restart, s.maxit});
      table[i][k] = {r.report.iterations, r.report.converged, r.report.final_residual};
    }
  }, s.threads);

  Json rep = envelope("bench", Json{{"dataset", dataset}, {"split", split}, {"preconditioners", preconds},
                                    {"solver", solver_json(s)}});
  Json rows = Json::array();
  std::string tsv = "sample";
  for (const auto& pc : preconds) tsv += "\t" + pc;
  tsv += "\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Json row{{"sample", samples[i].id}, {"medium", samples[i].medium}};
    tsv += std::to_string(samples[i].id);
    for (std::size_t k = 0; k < preconds.size(); ++k) {
      const Cell& c = table[i][k];
      row[preconds[k]] = Json{{"iterations", c.iterations}, {"converged", c.converged}, {"residual", c.residual}};
      tsv += "\t" + std::to_string(c.iterations) + (c.converged ? "" : "*");
    }
    tsv += "\n";
    rows.push_back(std::move(row));
  }
  rep["rows"] = std::move(rows);
  Json medians;
  for (std::size_t k = 0; k < preconds.size(); ++k) {
    std::vector<int> it;
    for (const auto& row : table) it.push_back(row[k].iterations);
    std::sort(it.begin(), it.end());
    const double med = it.size() % 2 ? it[it.size() / 2] : 0.5 * (it[it.size() / 2 - 1] + it[it.size() / 2]);
    medians[preconds[k]] = med;
  }
  rep["median_iterations"] = medians;
  if (preconds.size() > 1) {
    Json red;
    const double base = medians[preconds[0]].get<double>();
    for (std::size_t k = 1; k < preconds.size(); ++k) {
      const double m = medians[preconds[k]].get<double>();
      red[preconds[k]] = m > 0 ? base / m : 0.0;
    }
    rep["median_reduction_vs_" + preconds[0]] = red;
  }
  std::cout << tsv;
  if (!out.empty()) {
    ensure_dir(out);
    write_json(rep, (fs::path(out) / "bench.json").string());
    write_text_file((fs::path(out) / "bench.tsv").string(), tsv);
  }
  return kExitOk;
}

// loss = |b - A D(psi)|_2 and loss_delta = |Pi b - A_delta D_delta(psi)|_2.
int cmd_eval_loss(const std::string& dataset, const std::string& pred, const std::string& mode, const std::string& split,
                  int threads, const std::string& out) {
  const Dataset ds = load_dataset(dataset);
  std::vector<SampleRecord> samples;
  for (const auto& r : ds.samples)
    if (split == "all" || r.split == split) samples.push_back(r);
  std::vector<FluxGrid> preds;
  if (!pred.empty()) {
    preds = read_flux(pred);
    if (preds.size() != samples.size())
      throw ConfigError("prediction file holds " + std::to_string(preds.size()) + " grids for " +
                        std::to_string(samples.size()) + " samples");
  } else if (mode != "exact" && mode != "zero") {
    throw ConfigError("eval-loss needs --pred or --mode exact|zero");
  }
  const int channels = 4 * ds.config.M;
  for (const auto& g : preds)
    if (g.channels != channels || g.I != ds.config.I) throw ConfigError("prediction grid shape does not match 4M x I x I");

  struct Row {
    double loss = 0.0, loss_delta = 0.0, bnorm = 0.0, fit_residual = 0.0;
  };
  std::vector<Row> rows(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Discretization disc =
        discretize(ds.media[samples[i].medium].field, ds.config.I, make_quadrature(ds.config.M, ds.config.g), nullptr, 1);
    const BoundaryData bc = BoundaryData::constant(disc.mesh, disc.quad, 0.0);
    const LinearSystem full = assemble_full(disc, bc);
    const CompressionIndex idx = compress(disc, ds.config.delta);
    const LinearSystem comp = assemble_compressed(idx, disc, bc);
    const CoefficientFit D(disc), Dd(disc, &idx.selected);
    const Eigen::VectorXd& b = ds.rhs[samples[i].rhs];
    FluxGrid psi(channels, ds.config.I);
    if (!preds.empty()) {
      psi = preds[i];
    } else if (mode == "exact") {
      LinearSystem s = full;
      s.b = b;
      psi = center_flux(disc, solve_sparse_direct(s));
      rows[i].fit_residual = D.residual(psi, solve_sparse_direct(s));
    }
    rows[i].loss = (b - full.A * D.apply(psi)).norm();
    rows[i].loss_delta = (project_rows(idx, disc, b) - comp.A * Dd.apply(psi)).norm();
    rows[i].bnorm = b.norm();
  }, threads);

  Json rep = envelope("eval-loss", Json{{"dataset", dataset}, {"pred", pred}, {"mode", mode}, {"split", split},
                                        {"delta", ds.config.delta}});
  Json arr = Json::array();
  double sum = 0.0, sum_d = 0.0;
  std::string tsv = "sample\tloss\tloss_delta\tb_norm\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    arr.push_back(Json{{"sample", samples[i].id},
                       {"loss", rows[i].loss},
                       {"loss_delta", rows[i].loss_delta},
                       {"b_norm", rows[i].bnorm},
                       {"fit_residual", rows[i].fit_residual}});
    sum += rows[i].loss;
    sum_d += rows[i].loss_delta;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d\t%.10g\t%.10g\t%.10g\n", samples[i].id, rows[i].loss, rows[i].loss_delta,
                  rows[i].bnorm);
    tsv += buf;
  }
  rep["samples"] = std::move(arr);
  const double n = samples.empty() ? 1.0 : double(samples.size());
  rep["mean_loss"] = sum / n;
  rep["mean_loss_delta"] = sum_d / n;
  std::cout << tsv << "mean\t" << sum / n << "\t" << sum_d / n << "\n";
  if (!out.empty()) {
    ensure_dir(out);
    write_json(rep, (fs::path(out) / "loss.json").string());
    write_text_file((fs::path(out) / "loss.tsv").string(), tsv);
  }
  return kExitOk;
}

int cmd_export(const ProblemOpts& p, const SolverOpts& s, const std::string& out, bool operators) {
  const Problem prob = resolve_problem(p);
  const Built b = build(prob, s);
  ensure_dir(out);
  write_system(b.sys, (fs::path(out) / "system.rtes").string());
  Json rep = envelope("export-system", Json{{"problem", problem_json(p)}, {"solver", solver_json(s)}});
  rep["system"] = Json{{"path", "system.rtes"}, {"dimension", b.sys.size()}, {"compressed", b.sys.compressed},
                       {"delta", b.sys.delta}, {"nnz", b.sys.A.nonZeros()}};
  if (operators) {
    const CoefficientFit D(b.disc, b.index ? &b.index->selected : nullptr);
    write_operator({b.index ? "D_delta" : "D", D.matrix(), D.offset()}, (fs::path(out) / "D.rteo").string());
    rep["operators"]["D"] = "D.rteo";
    if (b.index) {
      write_operator({"Pi", projection_matrix(*b.index, b.disc), {}}, (fs::path(out) / "Pi.rteo").string());
      rep["operators"]["Pi"] = "Pi.rteo";
    }
  }
  write_json(rep, (fs::path(out) / "export.json").string());
  std::cout << "wrote " << (b.sys.compressed ? "compressed" : "full") << " system of dimension " << b.sys.size()
            << " to " << out << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& path) {
  const MgNetWeights w = load_weights(path);
  Json j{{"format", "MGNW"}, {"version", w.version}, {"L", w.L}, {"C0", w.C0}, {"M", w.M}, {"I", w.I}, {"nu", w.nu}};
  Json t = Json::array();
  for (const auto& x : w.tensors) {
    float amax = 0.0f;
    for (float v : x.data) amax = std::max(amax, std::abs(v));
    t.push_back(Json{{"name", x.name}, {"dims", x.dims}, {"max_abs", amax}});
  }
  j["tensors"] = std::move(t);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_init_weights(std::uint32_t L, std::uint32_t C0, std::uint32_t M, std::uint32_t I, std::vector<std::uint32_t> nu,
                     double scale, std::uint64_t seed, const std::string& out) {
  if (nu.empty()) nu.assign(L, 2);
  if (nu.size() == 1 && L > 1) nu.assign(L, nu[0]);
  write_weights(make_weights(L, C0, M, I, nu, scale, seed), out);
  std::cout << "wrote " << (scale == 0.0 ? "zero" : "random") << " weights to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radiative transfer solver: TFPS/ATFPS discretization, GMRES, learned preconditioning"};
  app.require_subcommand(1);

  DatasetConfig gen_cfg;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a dataset");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--I", gen_cfg.I, "cells per axis");
  gen->add_option("--M", gen_cfg.M, "directions per quadrant");
  gen->add_option("--g", gen_cfg.g, "anisotropy");
  gen->add_option("--regime", gen_cfg.regime, "medium regime");
  gen->add_option("--degree", gen_cfg.degree, "polynomial degree (0 draws 1..4 per medium)");
  gen->add_option("--n-rhs", gen_cfg.n_rhs, "train/val rhs vectors");
  gen->add_option("--n-media", gen_cfg.n_media, "train/val media");
  gen->add_option("--n-test", gen_cfg.n_test, "test samples (one medium each)");
  gen->add_option("--seed", gen_cfg.seed, "base seed");
  gen->add_option("--delta", gen_cfg.delta, "compression tolerance recorded for the filtered loss");
  gen->add_flag("--export-systems", gen_cfg.export_systems, "write per-medium systems and operators");

  ProblemOpts solve_p;
  SolverOpts solve_s;
  std::string solve_out;
  bool verify = false;
  auto* solve = app.add_subcommand("solve", "assemble and solve one problem");
  add_problem(solve, solve_p);
  add_solver(solve, solve_s);
  solve->add_option("--out", solve_out, "output directory for report and arrays");
  solve->add_flag("--verify", verify, "compare against a direct solve");

  std::string bench_ds, bench_split = "test", bench_out;
  std::vector<std::string> bench_pre;
  SolverOpts bench_s;
  auto* bench = app.add_subcommand("bench", "GMRES iteration table over dataset samples");
  bench->add_option("--dataset", bench_ds, "dataset directory")->required();
  bench->add_option("--precond", bench_pre, "preconditioners to compare (repeatable)");
  bench->add_option("--split", bench_split, "sample split");
  bench->add_option("--out", bench_out, "output directory");
  add_solver(bench, bench_s, false);

  std::string loss_ds, loss_pred, loss_mode, loss_split = "val", loss_out;
  int loss_threads = 0;
  auto* loss = app.add_subcommand("eval-loss", "evaluate the residual loss and the filtered loss");
  loss->add_option("--dataset", loss_ds, "dataset directory")->required();
  loss->add_option("--pred", loss_pred, "flux predictions (RTEF, one grid per selected sample)");
  loss->add_option("--mode", loss_mode, "exact | zero, used without --pred");
  loss->add_option("--split", loss_split, "train | val | test | all");
  loss->add_option("--threads", loss_threads, "worker threads");
  loss->add_option("--out", loss_out, "output directory");

  ProblemOpts exp_p;
  SolverOpts exp_s;
  std::string exp_out;
  bool exp_ops = false;
  auto* exp = app.add_subcommand("export-system", "write a system file");
  add_problem(exp, exp_p);
  exp->add_option("--delta", exp_s.delta, "compress with tolerance delta");
  exp->add_option("--out", exp_out, "output directory")->required();
  exp->add_flag("--operators", exp_ops, "also write the coefficient fit and projection operators");

  std::string insp_path;
  auto* insp = app.add_subcommand("inspect-weights", "validate and summarize a weight file");
  insp->add_option("path", insp_path, "weight file")->required();

  std::uint32_t iw_L = 3, iw_C0 = 3, iw_M = 1, iw_I = 32;
  std::vector<std::uint32_t> iw_nu;
  double iw_scale = 0.0;
  std::uint64_t iw_seed = 0;
  std::string iw_out;
  auto* iw = app.add_subcommand("init-weights", "write zero or random weights");
  iw->add_option("--L", iw_L, "levels");
  iw->add_option("--C0", iw_C0, "base channels");
  iw->add_option("--M", iw_M, "directions per quadrant");
  iw->add_option("--I", iw_I, "grid size");
  iw->add_option("--nu", iw_nu, "smoothing steps per level (one value or L values)");
  iw->add_option("--scale", iw_scale, "0 for zero weights, otherwise kernel std scale");
  iw->add_option("--seed", iw_seed, "seed");
  iw->add_option("--out", iw_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_cfg, gen_out);
    if (*solve) return cmd_solve(solve_p, solve_s, solve_out, verify);
    if (*bench) return cmd_bench(bench_ds, bench_pre, bench_s, bench_split, bench_out);
    if (*loss) return cmd_eval_loss(loss_ds, loss_pred, loss_mode, loss_split, loss_threads, loss_out);
    if (*exp) return cmd_export(exp_p, exp_s, exp_out, exp_ops);
    if (*insp) return cmd_inspect(insp_path);
    if (*iw) return cmd_init_weights(iw_L, iw_C0, iw_M, iw_I, iw_nu, iw_scale, iw_seed, iw_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
