#include "rte/medium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "rte/error.hpp"
#include "rte/rng.hpp"

namespace rte {

namespace {

double poly1d(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return 2.0 + v;
}

double poly1d_abs_max(const std::vector<double>& c) {
  double v = 2.0;
  double p = 1.0;
  for (double ck : c) {
    v += std::abs(ck) * p;
    p *= 0.5;
  }
  return v;
}

double poly1d_slope_max(const std::vector<double>& c) {
  double v = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) v += static_cast<double>(k) * std::abs(c[k]) * std::pow(0.5, double(k - 1));
  return v;
}

// Three-point Gauss-Legendre on [-1, 1]; exact through degree 5 per axis.
constexpr std::array<double, 3> kGaussNodes{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussWeights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

}  // namespace

Regime parse_regime(std::string_view tag) {
  if (tag == "diffusion") return Regime::Diffusion;
  if (tag == "transport") return Regime::Transport;
  if (tag.starts_with("interface-") && tag.size() == 11) {
    const char d = tag.back();
    if (d >= '1' && d <= '6') return static_cast<Regime>(static_cast<int>(Regime::InterfaceLeftRight) + (d - '1'));
  }
  throw ConfigError("unknown regime tag '" + std::string(tag) + "'");
}

std::string regime_tag(Regime regime) {
  switch (regime) {
    case Regime::Diffusion:
      return "diffusion";
    case Regime::Transport:
      return "transport";
    default:
      return "interface-" + std::to_string(static_cast<int>(regime) - static_cast<int>(Regime::InterfaceLeftRight) + 1);
  }
}

double ProductPolynomial::operator()(double x, double y) const {
  return poly1d(cx, x - 0.5) * poly1d(cy, y - 0.5) + shift;
}

ProductPolynomial ProductPolynomial::constant(double value) { return {{}, {}, value - 4.0}; }

double MediumField::epsilon(double x, double y) const {
  if (eps_fixed > 0.0) return eps_fixed;
  const double low = diffusive_epsilon();
  const bool left = x < 0.5;
  const bool bottom = y < 0.5;
  const bool center = x > 0.25 && x < 0.75 && y > 0.25 && y < 0.75;
  switch (regime) {
    case Regime::Diffusion:
      return low;
    case Regime::Transport:
      return 1.0;
    case Regime::InterfaceLeftRight:
      return left ? low : 1.0;
    case Regime::InterfaceRightLeft:
      return left ? 1.0 : low;
    case Regime::InterfaceBottomTop:
      return bottom ? low : 1.0;
    case Regime::InterfaceTopBottom:
      return bottom ? 1.0 : low;
    case Regime::InterfaceCenterIn:
      return center ? low : 1.0;
    case Regime::InterfaceCenterOut:
      return center ? 1.0 : low;
  }
  return 1.0;
}

double min_scattering_margin(const MediumField& f) {
  constexpr int n = 1024;
  double lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = double(i) / n;
      const double y = double(j) / n;
      lo = std::min(lo, f.sigma_t(x, y) - f.sigma_a(x, y));
    }
  }
  // Lipschitz bound of the difference; any point is within half a grid diagonal of a node.
  const double gx = poly1d_slope_max(f.sigma_t.cx) * poly1d_abs_max(f.sigma_t.cy) +
                    poly1d_slope_max(f.sigma_a.cx) * poly1d_abs_max(f.sigma_a.cy);
  const double gy = poly1d_abs_max(f.sigma_t.cx) * poly1d_slope_max(f.sigma_t.cy) +
                    poly1d_abs_max(f.sigma_a.cx) * poly1d_slope_max(f.sigma_a.cy);
  const double half_step = 0.5 / n;
  return lo - (gx + gy) * half_step;
}

MediumField sample_medium(Regime regime, int degree, std::uint64_t seed) {
  if (degree < 1 || degree > 4) throw ConfigError("sample_medium: degree must be in 1..4, got " + std::to_string(degree));
  Rng rng(seed);
  auto draw = [&] {
    std::vector<double> c(degree + 1);
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);
    return c;
  };
  MediumField f;
  f.regime = regime;
  f.degree = degree;
  f.seed = seed;
  f.sigma_t.cx = draw();
  f.sigma_t.cy = draw();
  f.sigma_a.cx = draw();
  f.sigma_a.cy = draw();
  f.eps_param = rng.uniform();
  f.source = 1.0;
  const double margin = min_scattering_margin(f);
  if (margin < 0.2) f.sigma_t.shift = 0.2 - margin;
  return f;
}

MediumField constant_medium(double sigma_t, double sigma_a, double eps, double q) {
  MediumField f;
  f.sigma_t = ProductPolynomial::constant(sigma_t);
  f.sigma_a = ProductPolynomial::constant(sigma_a);
  f.eps_fixed = eps;
  f.source = q;
  f.regime = eps < 1.0 ? Regime::Diffusion : Regime::Transport;
  return f;
}

CellCoefficients make_cell_coefficients(double sigma_t, double sigma_a, double eps, double q) {
  if (!(sigma_t > 0.0) || !(eps > 0.0 && eps <= 1.0) || sigma_a < 0.0)
    throw ConfigError("cell coefficients out of range: sigma_t=" + std::to_string(sigma_t) +
                      " sigma_a=" + std::to_string(sigma_a) + " eps=" + std::to_string(eps));
  CellCoefficients c;
  c.sigma_t = sigma_t;
  c.sigma_a = sigma_a;
  c.sigma_s = sigma_t - sigma_a;
  c.eps = eps;
  c.q = q;
  c.eff_total = sigma_t / eps;
  c.eff_scatter = sigma_t / eps - eps * sigma_a;
  c.eff_source = eps * q;
  c.rho = eps * eps * sigma_a / sigma_t;
  c.gamma = 1.0 - c.rho;
  if (!(c.eff_total > c.eff_scatter) || !(c.rho > 0.0) || c.eff_scatter < 0.0)
    throw ConfigError("cell without absorption: eff_total=" + std::to_string(c.eff_total) +
                      " eff_scatter=" + std::to_string(c.eff_scatter));
  return c;
}

std::vector<CellCoefficients> cell_average(const MediumField& f, int I) {
  if (I < 1) throw ConfigError("cell_average: grid size must be positive");
  const double h = 1.0 / I;
  std::vector<CellCoefficients> cells;
  cells.reserve(std::size_t(I) * I);
  for (int j = 0; j < I; ++j) {
    for (int i = 0; i < I; ++i) {
      double st = 0.0, sa = 0.0, ep = 0.0;
      for (int b = 0; b < 3; ++b) {
        const double y = (j + 0.5 + 0.5 * kGaussNodes[b]) * h;
        for (int a = 0; a < 3; ++a) {
          const double x = (i + 0.5 + 0.5 * kGaussNodes[a]) * h;
          const double w = 0.25 * kGaussWeights[a] * kGaussWeights[b];
          st += w * f.sigma_t(x, y);
          sa += w * f.sigma_a(x, y);
          ep += w * f.epsilon(x, y);
        }
      }
      try {
        cells.push_back(make_cell_coefficients(st, sa, ep, f.source));
      } catch (const ConfigError& e) {
        throw ConfigError("cell (" + std::to_string(i) + "," + std::to_string(j) + "): " + e.what());
      }
    }
  }
  return cells;
}

}  // namespace rte
