#include "rte/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "rte/error.hpp"

namespace rte {

namespace {

// First-quadrant nodes, ordered by azimuth.
std::vector<Direction> first_quadrant(int M) {
  switch (M) {
    case 1: {
      // Projected S2: c = s = zeta = 1/sqrt(3).
      const double mu = 1.0 / std::sqrt(3.0);
      return {{mu, mu}};
    }
    case 2: {
      // One polar level (zeta = 1/sqrt(3)) with two Chebyshev azimuths.
      const double r = std::sqrt(2.0 / 3.0);
      const double a1 = std::numbers::pi / 8.0;
      const double a2 = 3.0 * std::numbers::pi / 8.0;
      return {{r * std::cos(a1), r * std::sin(a1)}, {r * std::cos(a2), r * std::sin(a2)}};
    }
    case 3: {
      // Projected level-symmetric S4 (equal weights).
      const double mu1 = 0.3500211745815407;
      const double mu2 = std::sqrt(1.0 - 2.0 * mu1 * mu1);
      return {{mu2, mu1}, {mu1, mu1}, {mu1, mu2}};
    }
    default:
      throw ConfigError("quadrature: M=" + std::to_string(M) + " outside the supported range [1, " +
                        std::to_string(kMaxQuadratureM) + "]");
  }
}

}  // namespace

AngularQuadrature build_quadrature(int M) {
  if (M < 1) throw ConfigError("quadrature: M must be positive, got " + std::to_string(M));
  const auto q1 = first_quadrant(M);

  AngularQuadrature quad;
  quad.M = M;
  quad.directions.reserve(4 * M);
  constexpr std::array<std::array<double, 2>, 4> signs{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  for (const auto& sg : signs) {
    // Within a quadrant keep increasing azimuth: reflected quadrants reverse the order.
    const bool reverse = sg[0] * sg[1] < 0;
    for (int j = 0; j < M; ++j) {
      const auto& d = q1[reverse ? M - 1 - j : j];
      quad.directions.push_back({sg[0] * d.c, sg[1] * d.s});
    }
  }
  quad.weights = Eigen::VectorXd::Constant(4 * M, 1.0 / (4.0 * M));
  return quad;
}

Eigen::MatrixXd hg_kernel(const AngularQuadrature& quad, double g) {
  if (!(std::abs(g) < 1.0)) throw ConfigError("hg_kernel: anisotropy must satisfy |g| < 1, got " + std::to_string(g));
  const int n = quad.size();
  Eigen::MatrixXd raw(n, n);
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) {
      const double mu = quad.directions[m].c * quad.directions[k].c + quad.directions[m].s * quad.directions[k].s;
      raw(m, k) = (1.0 - g * g) / std::pow(1.0 + g * g - 2.0 * g * mu, 1.5);
    }
  }

  // Symmetric scaling kappa = D raw D with (kappa W 1) = 1. For direction sets
  // on which the symmetry group acts transitively this is plain row scaling.
  const Eigen::VectorXd& w = quad.weights;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd row = d.asDiagonal() * raw * (d.cwiseProduct(w));
    d = d.cwiseQuotient(row.cwiseSqrt());
    if ((row.array() - 1.0).abs().maxCoeff() < 1e-15) break;
  }
  Eigen::MatrixXd kappa = d.asDiagonal() * raw * d.asDiagonal();
  // Symmetrize away rounding asymmetry, then fix each row sum exactly.
  kappa = 0.5 * (kappa + kappa.transpose()).eval();
  const Eigen::VectorXd sums = kappa * w;
  for (int m = 0; m < n; ++m) kappa.row(m) /= sums(m);
  return kappa;
}

AngularQuadrature make_quadrature(int M, double g) {
  AngularQuadrature quad = build_quadrature(M);
  quad.kernel = hg_kernel(quad, g);
  quad.anisotropy = g;
  return quad;
}

double kernel_conservation_error(const AngularQuadrature& quad) {
  if (!quad.has_kernel()) return 0.0;
  return ((quad.kernel * quad.weights).array() - 1.0).abs().maxCoeff();
}

}  // namespace rte
