#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rte {

// In-plane direction (c, s) = projection of a unit vector onto the x-y plane.
struct Direction {
  double c;
  double s;
};

// Discrete ordinates set in x-y geometry with 4M directions and the
// discretized Henyey-Greenstein kernel.
//
// Directions are stored quadrant by quadrant, (+,+), (-,+), (-,-), (+,-),
// each quadrant holding M directions ordered by azimuth. Weights sum to 1.
struct AngularQuadrature {
  int M = 0;
  std::vector<Direction> directions;
  Eigen::VectorXd weights;
  double anisotropy = 0.0;
  Eigen::MatrixXd kernel;  // 4M x 4M, empty until hg_kernel has been applied

  int size() const { return 4 * M; }
  bool has_kernel() const { return kernel.size() > 0; }
};

// Largest supported quarter count.
inline constexpr int kMaxQuadratureM = 3;

// Direction set without kernel; M in [1, kMaxQuadratureM].
AngularQuadrature build_quadrature(int M);

// Henyey-Greenstein kernel evaluated at node pairs and scaled so that
// sum_n kappa_mn w_n = 1 for every row; requires |g| < 1.
Eigen::MatrixXd hg_kernel(const AngularQuadrature& quad, double g);

// build_quadrature followed by hg_kernel.
AngularQuadrature make_quadrature(int M, double g);

// max_m |sum_n kappa_mn w_n - 1|.
double kernel_conservation_error(const AngularQuadrature& quad);

}  // namespace rte
