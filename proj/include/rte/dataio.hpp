#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rte/assembly.hpp"
#include "rte/krylov.hpp"
#include "rte/medium.hpp"

namespace rte {

using Json = nlohmann::ordered_json;

// Linear system file ("RTES").
std::vector<std::uint8_t> serialize_system(const LinearSystem& sys);
LinearSystem parse_system(const std::vector<std::uint8_t>& bytes, const std::string& source = "system");
void write_system(const LinearSystem& sys, const std::string& path);
LinearSystem read_system(const std::string& path);

// Sparse affine operator x -> A x + offset ("RTEO"); offset may be empty.
struct SparseOperator {
  std::string kind;
  SparseMatrix A;
  Eigen::VectorXd offset;
};
std::vector<std::uint8_t> serialize_operator(const SparseOperator& op);
SparseOperator parse_operator(const std::vector<std::uint8_t>& bytes, const std::string& source = "operator");
void write_operator(const SparseOperator& op, const std::string& path);
SparseOperator read_operator(const std::string& path);

// Stack of flux grids with a common shape ("RTEF").
std::vector<std::uint8_t> serialize_flux(const std::vector<FluxGrid>& grids);
std::vector<FluxGrid> parse_flux(const std::vector<std::uint8_t>& bytes, const std::string& source = "flux");
void write_flux(const std::vector<FluxGrid>& grids, const std::string& path);
std::vector<FluxGrid> read_flux(const std::string& path);

struct DatasetConfig {
  int I = 32;
  int M = 1;
  double g = 0.0;
  std::string regime = "diffusion";
  int degree = 0;  // 0: drawn from 1..4 per medium
  int n_rhs = 100;
  int n_media = 10;
  int n_test = 10;
  std::uint64_t seed = 0;
  double delta = 1e-4;
  bool export_systems = false;
};

struct MediumRecord {
  int id = 0;
  std::string split;  // "trainval" or "test"
  MediumField field;
};

struct SampleRecord {
  int id = 0;
  std::string split;  // "train", "val" or "test"
  int medium = 0;
  int rhs = 0;
};

struct Dataset {
  DatasetConfig config;
  std::vector<MediumRecord> media;
  std::vector<SampleRecord> samples;
  Eigen::Index rhs_length = 0;
  std::vector<Eigen::VectorXd> rhs;  // full-system row layout

  std::size_t count(const std::string& split) const;
};

// Deterministic in the config: same config, same bytes.
Dataset generate_dataset(const DatasetConfig& config);
Json manifest_json(const Dataset& ds);
// Writes manifest.json and rhs.bin, plus per-medium systems/operators when requested.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

Json medium_json(const MediumField& f);
MediumField medium_from_json(const Json& j);
Json report_json(const SolveReport& rep);

}  // namespace rte
