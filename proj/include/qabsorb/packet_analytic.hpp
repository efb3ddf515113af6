#pragma once

// Closed forms for a Gaussian wave packet on the half-line x <= 0 running into
// an absorbing wall at x = 0: image-method wave function, wall flux rate,
// partial-absorption reflection coefficient, and the sine-transform mode
// decomposition used by the energy-window absorption mode.
//
// The single wall of this geometry reads its absorption length from
// params.lambda_left.

#include "core.hpp"

namespace qabsorb {

// Packet width a, launch distance x0 > 0 (initial center at x = -x0), mean
// wavenumber k0 (velocity hbar k0 / m toward the wall). A is the norm defect
// of the image construction; the packet is unit-norm on (-inf, 0] by design.
struct GaussianPacketParams {
  double width_a;
  double x0;
  double k0;
  PhysicalParams params;

  GaussianPacketParams(double width_a_, double x0_, double k0_,
                       const PhysicalParams& p)
      : width_a(width_a_), x0(x0_), k0(k0_), params(p) {
    params.validate();
    if (!(width_a > 0.0) || !is_finite(width_a))
      throw std::invalid_argument("GaussianPacketParams: width_a must be positive");
    if (!(x0 > 0.0) || !is_finite(x0))
      throw std::invalid_argument("GaussianPacketParams: x0 must be positive");
    if (!is_finite(k0))
      throw std::invalid_argument("GaussianPacketParams: k0 must be finite");
    const double A = normalization();  // rounds to 1.0 for far-launched packets
    if (!(A > 0.0 && A <= 1.0))
      throw std::invalid_argument("GaussianPacketParams: normalization A outside (0,1]");
  }

  double normalization() const {
    const double a = width_a;
    return 1.0 - std::exp(-2.0 * x0 * x0 / (a * a)) * std::exp(-0.5 * a * a * k0 * k0);
  }

  // Classical arrival time of the packet center at the wall.
  double arrival_time() const { return x0 * params.mass / (params.hbar * k0); }
};

namespace detail {

struct PacketTerms {
  cdouble prefactor;   // common envelope factor
  cdouble term1, term2;
  cdouble dterm1, dterm2;  // x-derivatives of the two image terms
};

inline PacketTerms packet_terms(double x, double t, const GaussianPacketParams& p) {
  const double a = p.width_a, x0 = p.x0, k0 = p.k0;
  const double hbar = p.params.hbar, m = p.params.mass;
  const cdouble beta(a * a, 2.0 * hbar * t / m);
  const double drift = hbar * k0 * t / m;
  const double abs_beta2 = a * a * a * a + 4.0 * hbar * hbar * t * t / (m * m);

  PacketTerms out;
  out.prefactor = std::pow(2.0 * a * a / pi, 0.25) /
                  (std::sqrt(p.normalization()) * std::pow(abs_beta2, 0.25));
  const double u1 = x + x0 - drift;  // incident image
  const double u2 = x - x0 + drift;  // reflected image
  const cdouble g1 = -u1 * u1 / beta + cdouble(0.0, k0 * (x + x0));
  const cdouble g2 = -u2 * u2 / beta - cdouble(0.0, k0 * (x - x0));
  out.term1 = std::exp(g1);
  out.term2 = std::exp(g2);
  out.dterm1 = (-2.0 * u1 / beta + cdouble(0.0, k0)) * out.term1;
  out.dterm2 = (-2.0 * u2 / beta - cdouble(0.0, k0)) * out.term2;
  return out;
}

}  // namespace detail

// The two-term image expression (global phase set to zero). Vanishes at x = 0
// for every t by construction. Physical support is x <= 0.
inline cdouble packet_value(double x, double t, const GaussianPacketParams& p) {
  if (!(t >= 0.0)) throw std::invalid_argument("packet_value: t must be >= 0");
  const detail::PacketTerms pt = detail::packet_terms(x, t, p);
  return pt.prefactor * (pt.term1 - pt.term2);
}

// Exact x-derivative of packet_value.
inline cdouble packet_derivative(double x, double t, const GaussianPacketParams& p) {
  if (!(t >= 0.0)) throw std::invalid_argument("packet_derivative: t must be >= 0");
  const detail::PacketTerms pt = detail::packet_terms(x, t, p);
  return pt.prefactor * (pt.dterm1 - pt.dterm2);
}

// |dpsi/dx|^2 at the wall, in closed form. The image pair doubles the
// derivative at x = 0, so the coefficient carries a factor 4 relative to a
// single image term; the finite-difference cross-check in the test suite pins
// this constant.
inline double wall_derivative_squared(double t, const GaussianPacketParams& p) {
  if (!(t >= 0.0)) throw std::invalid_argument("wall_derivative_squared: t must be >= 0");
  const double a = p.width_a, x0 = p.x0, k0 = p.k0;
  const double hbar = p.params.hbar, m = p.params.mass;
  const double abs_beta2 = a * a * a * a + 4.0 * hbar * hbar * t * t / (m * m);
  const double u = x0 - hbar * k0 * t / m;
  const double bracket = 4.0 * x0 * x0 + a * a * a * a * k0 * k0;
  const double expo = std::exp(-2.0 * a * a * u * u / abs_beta2);
  return 4.0 * std::sqrt(2.0) * a * bracket * expo /
         (std::sqrt(pi) * p.normalization() * std::pow(abs_beta2, 1.5));
}

// Absorption rate at the wall: kappa * |dpsi/dx(0,t)|^2. Strictly positive,
// decays like t^-3.
inline double boundary_flux_rate(double t, const GaussianPacketParams& p,
                                 RateConvention conv = RateConvention::pi_m) {
  return kappa_factor(p.params, p.params.lambda_left, conv) *
         wall_derivative_squared(t, p);
}

// Envelope constant C with |dpsi/dx(0,t)|^2 <= C / t^3 for all t > 0 (drop
// the exponential, |beta|^3 >= (2 hbar t / m)^3).
inline double derivative_tail_coefficient(const GaussianPacketParams& p) {
  const double a = p.width_a, x0 = p.x0, k0 = p.k0;
  const double hbar = p.params.hbar, m = p.params.mass;
  const double bracket = 4.0 * x0 * x0 + a * a * a * a * k0 * k0;
  const double m3 = m * m * m / (8.0 * hbar * hbar * hbar);
  return 4.0 * std::sqrt(2.0) * a * bracket * m3 /
         (std::sqrt(pi) * p.normalization());
}

// Same envelope with the absorption factor: kappa*|dpsi/dx|^2 <= C / t^3.
inline double flux_tail_coefficient(const GaussianPacketParams& p,
                                    RateConvention conv = RateConvention::pi_m) {
  return kappa_factor(p.params, p.params.lambda_left, conv) *
         derivative_tail_coefficient(p);
}

struct QuadratureControl {
  double abs_tol = 1e-10;
  double t_max_cap = 1e9;
};

// Time-integrated absorption exponent Int_0^inf kappa |dpsi/dx(0,t)|^2 dt.
inline double absorption_exponent(const GaussianPacketParams& p,
                                  const QuadratureControl& ctl = {},
                                  RateConvention conv = RateConvention::pi_m) {
  const std::function<double(double)> rate = [&p, conv](double t) {
    return boundary_flux_rate(t, p, conv);
  };
  const double peak_scale = std::max(p.arrival_time(), p.width_a * p.params.mass /
                                                           (p.params.hbar * std::max(std::abs(p.k0), 1.0)));
  const ImproperIntegral integral = integrate_to_infinity(
      rate, std::max(peak_scale, 1e-3), flux_tail_coefficient(p, conv),
      ctl.abs_tol, ctl.t_max_cap);
  return integral.value + 0.5 * integral.tail_bound;
}

// Never-absorbed fraction R = S(inf) = exp(-absorption exponent). In (0,1)
// whenever lambda > 0; equals 1 at lambda = 0.
inline double reflection_coefficient(const GaussianPacketParams& p,
                                     const QuadratureControl& ctl = {},
                                     RateConvention conv = RateConvention::pi_m) {
  if (p.params.lambda_left == 0.0) return 1.0;
  return std::exp(-absorption_exponent(p, ctl, conv));
}

// Sine-transform coefficient of the t = 0 packet over the half-line modes
// sqrt(2/pi) sin(kx), k in (0, inf):
//   a_k = -i (2 pi)^{-1/4} sqrt(a/A) [e^{i k x0} e^{-a^2 (k-k0)^2/4}
//                                     - e^{-i k x0} e^{-a^2 (k+k0)^2/4}],
// which satisfies Int_0^inf |a_k|^2 dk = 1 exactly (Parseval).
inline cdouble sine_coefficient(double k, const GaussianPacketParams& p) {
  const double a = p.width_a, x0 = p.x0, k0 = p.k0;
  const cdouble plus = std::exp(cdouble(-(a * a) * (k - k0) * (k - k0) / 4.0, k * x0));
  const cdouble minus = std::exp(cdouble(-(a * a) * (k + k0) * (k + k0) / 4.0, -k * x0));
  return cdouble(0.0, -1.0) * std::pow(2.0 * pi, -0.25) *
         std::sqrt(a / p.normalization()) * (plus - minus);
}

// |a_k|^2 in closed form (cosh - cos bracket, non-negative for all k).
inline double sine_coefficient_squared(double k, const GaussianPacketParams& p) {
  const double a = p.width_a, x0 = p.x0, k0 = p.k0;
  const double envelope = std::exp(-0.5 * a * a * (k * k + k0 * k0));
  const double bracket = std::cosh(a * a * k * k0) - std::cos(2.0 * x0 * k);
  return (a / p.normalization()) * std::sqrt(2.0 / pi) * envelope * bracket;
}

// Energy-window decay rate of the k-th continuum mode: E_k/hbar share
// |a_k|^2 * hbar k^2 / (2m). Zero at k = 0; non-negative everywhere.
inline double mode_decay_rate(double k, const GaussianPacketParams& p) {
  return sine_coefficient_squared(k, p) * p.params.hbar * k * k /
         (2.0 * p.params.mass);
}

// Continuum energy-window survival S_E(t) = Int_0^inf |a_k|^2 e^{-rate_k t} dk
// on a uniform k-grid. The grid must capture the spectrum: the check
// Int |a_k|^2 dk >= 1 - 1e-6 guards the cutoff.
inline double energy_window_survival_continuum(const GaussianPacketParams& p,
                                               double t, double k_max,
                                               std::size_t n_k) {
  if (!(t >= 0.0)) throw std::invalid_argument("energy_window_survival_continuum: t >= 0");
  if (!(k_max > 0.0) || n_k < 3)
    throw std::invalid_argument("energy_window_survival_continuum: bad k grid");
  const double dk = k_max / static_cast<double>(n_k - 1);
  std::vector<double> weight(n_k), damped(n_k);
  for (std::size_t i = 0; i < n_k; ++i) {
    const double k = static_cast<double>(i) * dk;
    weight[i] = sine_coefficient_squared(k, p);
    damped[i] = weight[i] * std::exp(-mode_decay_rate(k, p) * t);
  }
  const double total = trapezoid(weight, dk);
  if (total < 1.0 - 1e-6)
    throw std::runtime_error(
        "energy_window_survival_continuum: k grid captures less than 1 - 1e-6 "
        "of the spectrum; raise k_max");
  return trapezoid(damped, dk);
}

}  // namespace qabsorb
