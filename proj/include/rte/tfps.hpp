#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rte/medium.hpp"
#include "rte/mesh.hpp"
#include "rte/quadrature.hpp"

namespace rte {

// Eigenpairs of C^{-1}[gamma K W - I] and S^{-1}[gamma K W - I] for one
// scattering ratio. Eigenvalues are sorted ascending (2M negative values
// first), eigenvectors are the matching columns, each with unit max-norm and
// positive sign at its first entry within 1e-10 of the largest magnitude.
struct EigenData {
  double rho = 0.0;  // 1 - gamma
  Eigen::VectorXd xi_x;
  Eigen::VectorXd xi_y;
  Eigen::MatrixXd lx;
  Eigen::MatrixXd ly;
  double max_residual = 0.0;
};

// Solves both directional eigenproblems for gamma = 1 - rho, 0 < rho <= 1.
EigenData solve_cell_eigenproblem(const AngularQuadrature& quad, double rho);

// Thread-safe cache of eigen data keyed on rho rounded to 12 significant
// digits. The stored data is always computed from the rounded key, so the
// result never depends on which cell populated an entry first.
class BasisCache {
 public:
  explicit BasisCache(AngularQuadrature quad) : quad_(std::move(quad)) {}

  std::shared_ptr<const EigenData> get(double rho);
  const AngularQuadrature& quadrature() const { return quad_; }
  std::size_t size() const;

  static double round_key(double rho);

 private:
  AngularQuadrature quad_;
  mutable std::mutex mutex_;
  std::map<double, std::shared_ptr<const EigenData>> entries_;
};

// Local TFPS solution space of one cell.
//
// Mode index k in [0, 8M): [0, 2M) x-modes with negative eigenvalue
// (reference point on the left face), [2M, 4M) positive x-modes (right face),
// [4M, 6M) negative y-modes (bottom face), [6M, 8M) positive y-modes (top face).
class CellBasis {
 public:
  CellBasis() = default;
  CellBasis(std::shared_ptr<const EigenData> eig, int M, double eff_total, double h, double x0, double y0,
            double particular);

  int M() const { return M_; }
  int mode_count() const { return 8 * M_; }
  double eff_total() const { return eff_total_; }
  double h() const { return h_; }
  double particular() const { return particular_; }
  const EigenData& eigen() const { return *eig_; }

  // Nonzero component of the eigenvalue vector of mode k.
  double xi(int k) const;
  bool is_x_mode(int k) const { return k < 4 * M_; }
  Face face(int k) const { return static_cast<Face>(k / (2 * M_)); }
  Eigen::Vector2d reference_point(int k) const;
  Eigen::Ref<const Eigen::VectorXd> eigenvector(int k) const;
  // exp{-|xi| eff_total h / 2}: magnitude of the mode at the cell center.
  double decay(int k) const;

  // Scalar factor exp{eff_total xi^T (z - z_k)}; z must lie in the closed cell.
  double factor(int k, double x, double y) const;
  Eigen::VectorXd eval(int k, double x, double y) const;
  void check_inside(double x, double y) const;

 private:
  std::shared_ptr<const EigenData> eig_;
  int M_ = 0;
  double eff_total_ = 0.0;
  double h_ = 0.0;
  double x0_ = 0.0;
  double y0_ = 0.0;
  double particular_ = 0.0;
};

CellBasis build_cell_basis(const CellCoefficients& coeff, BasisCache& cache, double h, double x0, double y0);

// Everything the assemblers need about one discretized problem.
struct Discretization {
  Mesh mesh;
  AngularQuadrature quad;
  std::vector<CellCoefficients> coeffs;
  std::vector<CellBasis> bases;

  int M() const { return quad.M; }
  int cells() const { return mesh.cell_count(); }
  int modes_per_cell() const { return 8 * quad.M; }
  int full_dimension() const { return cells() * modes_per_cell(); }
};

// Builds all cell bases (in parallel) for given cell coefficients.
Discretization discretize(const Mesh& mesh, const AngularQuadrature& quad, std::vector<CellCoefficients> coeffs,
                          BasisCache* cache = nullptr, int threads = 0);
Discretization discretize(const MediumField& medium, int I, const AngularQuadrature& quad,
                          BasisCache* cache = nullptr, int threads = 0);

}  // namespace rte
