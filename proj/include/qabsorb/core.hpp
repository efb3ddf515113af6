#pragma once

// Shared physical parameters, sampling grids, and complex field containers.
// Everything here is immutable after construction; all free functions are pure.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qabsorb {

typedef std::complex<double> cdouble;

inline constexpr double pi = 3.14159265358979323846264338327950288;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const cdouble& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Exponent constant convention for absorption rates: kappa = lambda*hbar/(pi*m)
// (default) or lambda*hbar/(2*pi*m). Both conventions are in circulation; the
// switch keeps the choice explicit everywhere.
enum class RateConvention { pi_m, two_pi_m };

// hbar, mass, and the per-wall characteristic absorption lengths.
// lambda_* = 0 recovers pure reflecting-boundary evolution (S(t) = 1).
struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  double lambda_left = 0.0;
  double lambda_right = 0.0;

  PhysicalParams() = default;
  PhysicalParams(double hbar_, double mass_, double lam_left, double lam_right)
      : hbar(hbar_), mass(mass_), lambda_left(lam_left), lambda_right(lam_right) {
    validate();
  }

  void validate() const {
    if (!(hbar > 0.0) || !is_finite(hbar))
      throw std::invalid_argument("PhysicalParams: hbar must be positive");
    if (!(mass > 0.0) || !is_finite(mass))
      throw std::invalid_argument("PhysicalParams: mass must be positive");
    if (!(lambda_left >= 0.0) || !is_finite(lambda_left) ||
        !(lambda_right >= 0.0) || !is_finite(lambda_right))
      throw std::invalid_argument("PhysicalParams: lambda must be >= 0");
  }
};

// Flux-to-rate conversion factor for one wall.
inline double kappa_factor(const PhysicalParams& p, double lambda,
                           RateConvention conv = RateConvention::pi_m) {
  const double denom = (conv == RateConvention::pi_m) ? pi : 2.0 * pi;
  return lambda * p.hbar / (denom * p.mass);
}

// Uniform time samples t_j = t0 + j*dt for j = 0..n_steps (n_steps+1 samples,
// so n_steps >= 1 always leaves the trapezoid rule well defined).
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;

  TimeGrid() = default;
  TimeGrid(double t0_, double dt_, std::size_t n_steps_)
      : t0(t0_), dt(dt_), n_steps(n_steps_) {
    if (!(dt > 0.0) || !is_finite(dt))
      throw std::invalid_argument("TimeGrid: dt must be positive");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    if (!is_finite(t0)) throw std::invalid_argument("TimeGrid: t0 must be finite");
  }

  std::size_t size() const { return n_steps + 1; }
  double time(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
  double t_end() const { return time(n_steps); }
};

// Uniform spatial grid on [x_min, x_max] with n_points >= 3 nodes.
struct SpaceGrid {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_points = 3;

  SpaceGrid() = default;
  SpaceGrid(double x_min_, double x_max_, std::size_t n_points_)
      : x_min(x_min_), x_max(x_max_), n_points(n_points_) {
    if (!(x_min < x_max) || !is_finite(x_min) || !is_finite(x_max))
      throw std::invalid_argument("SpaceGrid: requires x_min < x_max");
    if (n_points < 3) throw std::invalid_argument("SpaceGrid: n_points must be >= 3");
  }

  double spacing() const {
    return (x_max - x_min) / static_cast<double>(n_points - 1);
  }
  double node(std::size_t i) const {
    // Last node lands on x_max exactly.
    if (i + 1 == n_points) return x_max;
    return x_min + static_cast<double>(i) * spacing();
  }
};

// Complex amplitude samples over a SpaceGrid. Entries must be finite.
struct ComplexField {
  SpaceGrid grid;
  std::vector<cdouble> values;

  ComplexField() = default;
  ComplexField(const SpaceGrid& g, std::vector<cdouble> v)
      : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_points)
      throw std::invalid_argument("ComplexField: values length must equal n_points");
    for (const cdouble& z : values)
      if (!is_finite(z))
        throw std::invalid_argument("ComplexField: non-finite value");
  }
};

// Trapezoidal quadrature of uniformly sampled values with spacing h.
inline double trapezoid(const std::vector<double>& v, double h) {
  if (v.size() < 2) throw std::invalid_argument("trapezoid: need >= 2 samples");
  double sum = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += v[i];
  return sum * h;
}

inline cdouble trapezoid(const std::vector<cdouble>& v, double h) {
  if (v.size() < 2) throw std::invalid_argument("trapezoid: need >= 2 samples");
  cdouble sum = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += v[i];
  return sum * h;
}

// Running trapezoid integral; result[j] = integral of v over [x_0, x_j],
// result[0] = 0. Cumulative form keeps downstream semigroup identities exact.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& v, double h) {
  if (v.size() < 2) throw std::invalid_argument("cumulative_trapezoid: need >= 2 samples");
  std::vector<double> out(v.size());
  out[0] = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    out[i] = out[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
  return out;
}

// Trapezoidal quadrature of |field|^2 over its grid.
inline double l2_norm_squared(const ComplexField& field) {
  std::vector<double> density(field.values.size());
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    if (!is_finite(field.values[i]))
      throw std::invalid_argument("l2_norm_squared: non-finite field value");
    density[i] = std::norm(field.values[i]);
  }
  return trapezoid(density, field.grid.spacing());
}

namespace detail {

template <typename T>
T adaptive_simpson_rec(const std::function<T(double)>& f, double a, double b,
                       T fa, T fm, T fb, T whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const T flm = f(lm), frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T delta = left + right - whole;
  if (depth <= 0)
    throw std::runtime_error("adaptive_simpson: subdivision limit reached without convergence");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature to absolute tolerance. Throws std::runtime_error
// when the recursion depth is exhausted before reaching tolerance.
template <typename T>
T adaptive_integrate(const std::function<T(double)>& f, double a, double b,
                     double abs_tol, int max_depth = 60) {
  if (!(b >= a)) throw std::invalid_argument("adaptive_integrate: requires b >= a");
  if (a == b) return T{};
  const T fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec<T>(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Adaptive quadrature over [0, inf) for integrands with a known decreasing
// envelope bound beyond some time: |f(t)| <= tail_coeff / t^3 for t >= tail_from.
// Integrates panel-by-panel (geometric panels after `peak_scale`) so a sharp
// interior peak cannot be stepped over, then adds the analytic t^-3 tail bound
// check: tail integral <= tail_coeff / (2 T^2) must be below tolerance.
struct ImproperIntegral {
  double value = 0.0;
  double tail_bound = 0.0;
  double t_max = 0.0;
};

inline ImproperIntegral integrate_to_infinity(const std::function<double(double)>& f,
                                              double peak_scale, double tail_coeff,
                                              double abs_tol, double t_max_cap = 1e9) {
  if (!(peak_scale > 0.0)) throw std::invalid_argument("integrate_to_infinity: peak_scale must be > 0");
  if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate_to_infinity: abs_tol must be > 0");
  // T with tail_coeff/(2 T^2) <= abs_tol/2.
  double t_end = std::sqrt(tail_coeff / abs_tol);
  if (t_end < 4.0 * peak_scale) t_end = 4.0 * peak_scale;
  if (t_end > t_max_cap)
    throw std::runtime_error("integrate_to_infinity: tail bound exceeds tolerance at configured t_max");
  ImproperIntegral out;
  out.t_max = t_end;
  double lo = 0.0, hi = peak_scale;
  double panel_tol = abs_tol / 8.0;
  while (lo < t_end) {
    if (hi > t_end) hi = t_end;
    out.value += adaptive_integrate<double>(f, lo, hi, panel_tol);
    lo = hi;
    hi *= 2.0;
    panel_tol *= 0.75;  // geometric budget; sum of panel tolerances stays < abs_tol
  }
  out.tail_bound = tail_coeff / (2.0 * t_end * t_end);
  return out;
}

}  // namespace qabsorb
