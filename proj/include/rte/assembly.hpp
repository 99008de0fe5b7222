#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rte/tfps.hpp"

namespace rte {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

// Sparse system together with its row/column maps.
//
// Columns are grouped by cell (cell-major). col_mode gives the local mode
// index of each column. Rows are grouped by interface in mesh order;
// row_local is the direction index (full system) or projected-mode index
// (compressed system) within that interface. row_owner assigns every row to
// one cell so that each cell owns as many rows as it has columns; this is
// the block structure used by block Jacobi and by the network lift.
struct LinearSystem {
  int M = 0;
  int I = 0;
  bool compressed = false;
  double delta = 0.0;
  SparseMatrix A;
  Eigen::VectorXd b;
  std::vector<int> row_interface;
  std::vector<int> row_local;
  std::vector<int> row_owner;
  std::vector<int> cell_col_offset;  // size cells + 1
  std::vector<int> col_mode;

  Eigen::Index size() const { return b.size(); }
  int cells() const { return static_cast<int>(cell_col_offset.size()) - 1; }
  int cell_columns(int c) const { return cell_col_offset[c + 1] - cell_col_offset[c]; }
};

// Directions entering the domain through a face (u . n < 0), in quadrature order.
std::vector<int> incoming_directions(const AngularQuadrature& quad, Face face);

// Inflow values at boundary midpoints: one slot per (boundary interface,
// incoming direction), boundary interfaces in mesh order.
struct BoundaryData {
  int slots_per_interface = 0;
  std::vector<double> values;

  static BoundaryData constant(const Mesh& mesh, const AngularQuadrature& quad, double value);
  double at(int boundary_index, int slot) const { return values[std::size_t(boundary_index) * slots_per_interface + slot]; }
};

// Per-direction angular flux at cell centers, layout [m][j][i].
struct FluxGrid {
  int channels = 0;
  int I = 0;
  std::vector<double> data;

  FluxGrid() = default;
  FluxGrid(int channels, int I) : channels(channels), I(I), data(std::size_t(channels) * I * I, 0.0) {}

  double& at(int m, int c) { return data[std::size_t(m) * I * I + c]; }
  double at(int m, int c) const { return data[std::size_t(m) * I * I + c]; }
};

// Full TFPS system from midpoint continuity and inflow conditions.
LinearSystem assemble_full(const Discretization& disc, const BoundaryData& bc);

// Sum_k alpha_C^k chi_C^k(z) + chi_C^s for a point z in cell C; alpha in the
// full column layout.
Eigen::VectorXd eval_cell(const Discretization& disc, const Eigen::VectorXd& alpha, int cell, double x, double y);

struct CellPoint {
  int cell;
  double x;
  double y;
};
std::vector<Eigen::VectorXd> eval_solution(const Discretization& disc, const Eigen::VectorXd& alpha,
                                           std::span<const CellPoint> points);

// Values at the cell center and the four face midpoints of every cell,
// stacked as [cell][point][direction]. Used for error norms.
Eigen::VectorXd sample_solution(const Discretization& disc, const Eigen::VectorXd& alpha);

// Flux at cell centers.
FluxGrid center_flux(const Discretization& disc, const Eigen::VectorXd& alpha);

// max over interior midpoints of |psi|_{C-} - psi|_{C+}|_inf.
double max_continuity_jump(const Discretization& disc, const Eigen::VectorXd& alpha);

// Direct reference solves.
Eigen::VectorXd solve_sparse_direct(const LinearSystem& sys);
Eigen::VectorXd solve_dense_direct(const LinearSystem& sys);

// The D map: per-cell least-squares fit of the local expansion to flux
// samples at the cell center and the four face midpoints. Midpoint samples
// average the two adjacent cell centers (one-sided at the boundary). D is
// affine: D(psi) = matrix * psi + offset, the offset carrying the particular
// solution. Restricting to selected modes gives D_delta.
class CoefficientFit {
 public:
  explicit CoefficientFit(const Discretization& disc, const std::vector<std::vector<int>>* selected = nullptr);

  Eigen::VectorXd apply(const FluxGrid& psi) const;
  Eigen::VectorXd apply_linear(const FluxGrid& psi) const;
  Eigen::VectorXd apply_linear(const Eigen::VectorXd& psi) const { return matrix_ * psi; }

  const SparseMatrix& matrix() const { return matrix_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  Eigen::Index output_size() const { return offset_.size(); }

  // max over cells of the 2-norm least-squares residual of coefficients alpha against samples of psi.
  double residual(const FluxGrid& psi, const Eigen::VectorXd& alpha) const;

  static constexpr int kPoints = 5;

 private:
  Eigen::VectorXd samples(const FluxGrid& psi, int cell) const;

  Mesh mesh_;
  int channels_ = 0;
  std::vector<double> particular_;
  std::vector<std::vector<int>> modes_;
  std::vector<int> offsets_;
  std::vector<Eigen::MatrixXd> design_;
  SparseMatrix matrix_;
  Eigen::VectorXd offset_;
};

}  // namespace rte
