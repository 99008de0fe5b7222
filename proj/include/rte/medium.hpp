#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rte {

enum class Regime {
  Diffusion,
  Transport,
  // Sharp-interface layouts mixing a diffusive eps_low with eps = 1.
  InterfaceLeftRight,    // left half diffusive
  InterfaceRightLeft,    // right half diffusive
  InterfaceBottomTop,    // bottom half diffusive
  InterfaceTopBottom,    // top half diffusive
  InterfaceCenterIn,     // central square [0.25, 0.75]^2 diffusive
  InterfaceCenterOut,    // everything outside the central square diffusive
};

// Tags: "diffusion", "transport", "interface-1" .. "interface-6".
Regime parse_regime(std::string_view tag);
std::string regime_tag(Regime regime);

// (2 + sum_k cx_k (x - 1/2)^k) * (2 + sum_k cy_k (y - 1/2)^k) + shift
struct ProductPolynomial {
  std::vector<double> cx;
  std::vector<double> cy;
  double shift = 0.0;

  double operator()(double x, double y) const;
  static ProductPolynomial constant(double value);
};

struct MediumField {
  ProductPolynomial sigma_t;
  ProductPolynomial sigma_a;
  Regime regime = Regime::Diffusion;
  double eps_param = 0.0;  // the c of eps_low = 0.01 (c + 0.1)
  double eps_fixed = 0.0;  // > 0 overrides the regime law with a constant eps
  double source = 1.0;     // q, constant
  int degree = 0;
  std::uint64_t seed = 0;

  double epsilon(double x, double y) const;
  double diffusive_epsilon() const { return 0.01 * (eps_param + 0.1); }
};

// Random medium built from product polynomials with U[-1,1] coefficients;
// sigma_T is shifted so that sigma_T - sigma_a >= 0.2 on the whole domain.
MediumField sample_medium(Regime regime, int degree, std::uint64_t seed);

// Homogeneous medium.
MediumField constant_medium(double sigma_t, double sigma_a, double eps, double q = 1.0);

// Rigorous lower bound of sigma_T - sigma_a on [0,1]^2.
double min_scattering_margin(const MediumField& field);

// Cell averages and the diffusively scaled effective coefficients.
struct CellCoefficients {
  double sigma_t = 0.0;
  double sigma_a = 0.0;
  double sigma_s = 0.0;
  double eps = 1.0;
  double q = 0.0;
  double eff_total = 0.0;    // sigma_t / eps
  double eff_scatter = 0.0;  // sigma_t / eps - eps sigma_a
  double eff_source = 0.0;   // eps q
  double gamma = 0.0;        // eff_scatter / eff_total
  double rho = 1.0;          // 1 - gamma = eps^2 sigma_a / sigma_t, kept separately for precision

  // Particular solution value eff_source / (eff_total - eff_scatter).
  double particular() const { return q / sigma_a; }
};

// Builds the effective coefficients from cell averages; rejects
// eff_total <= eff_scatter (no absorption).
CellCoefficients make_cell_coefficients(double sigma_t, double sigma_a, double eps, double q);

// Per-cell averages on the uniform I x I mesh, cells in row-major order
// (index j * I + i, j along y).
std::vector<CellCoefficients> cell_average(const MediumField& field, int I);

}  // namespace rte
