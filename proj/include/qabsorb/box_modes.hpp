#pragma once

// Eigenfunction-expansion representation of a particle in a hard-wall box
// [0, a]: mode energies, series evolution, wall flux, the two-level beating
// survival law, and the energy-window decay variant with its band-restricted
// split.

#include "absorption_engine.hpp"
#include "core.hpp"

namespace qabsorb {

// E_n = hbar^2 n^2 pi^2 / (2 m a^2).
inline double mode_energy(int n, double width_a, const PhysicalParams& params) {
  if (n < 1) throw std::domain_error("mode_energy: mode index must be >= 1");
  if (!(width_a > 0.0)) throw std::domain_error("mode_energy: width must be positive");
  const double npi = static_cast<double>(n) * pi;
  return params.hbar * params.hbar * npi * npi /
         (2.0 * params.mass * width_a * width_a);
}

struct BoxMode {
  int n;
  cdouble amplitude;
};

// Finite expansion psi(x,t) = sum A_n e^{-i E_n t/hbar} sin(n pi x / a) over
// distinct mode indices n >= 1. The eigenfunctions carry norm^2 = a/2, so the
// state is normalized iff sum |A_n|^2 a/2 = 1.
struct BoxExpansion {
  double width_a;
  std::vector<BoxMode> modes;
  PhysicalParams params;

  BoxExpansion(double a, std::vector<BoxMode> ms, const PhysicalParams& p)
      : width_a(a), modes(std::move(ms)), params(p) {
    params.validate();
    if (!(width_a > 0.0) || !is_finite(width_a))
      throw std::invalid_argument("BoxExpansion: width must be positive");
    if (modes.empty())
      throw std::invalid_argument("BoxExpansion: at least one mode required");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (modes[i].n < 1)
        throw std::invalid_argument("BoxExpansion: mode indices must be >= 1");
      if (!is_finite(modes[i].amplitude))
        throw std::invalid_argument("BoxExpansion: non-finite amplitude");
      for (std::size_t j = 0; j < i; ++j)
        if (modes[j].n == modes[i].n)
          throw std::invalid_argument("BoxExpansion: duplicate mode index");
    }
  }

  double norm_squared() const {
    double s = 0.0;
    for (const BoxMode& m : modes) s += std::norm(m.amplitude);
    return s * width_a / 2.0;
  }
  bool normalized() const { return std::abs(norm_squared() - 1.0) <= 1e-12; }
};

// Truncated series at time t on a grid spanning exactly [0, a]; the wall nodes
// are set to zero rather than trusting sin() rounding.
inline ComplexField evolve(const BoxExpansion& e, const SpaceGrid& grid, double t) {
  if (grid.x_min != 0.0 || grid.x_max != e.width_a)
    throw std::invalid_argument("evolve: grid must span [0, width_a]");
  std::vector<cdouble> v(grid.n_points, cdouble(0.0, 0.0));
  for (const BoxMode& m : e.modes) {
    const double En = mode_energy(m.n, e.width_a, e.params);
    const cdouble phase = m.amplitude *
                          std::exp(cdouble(0.0, -En * t / e.params.hbar));
    for (std::size_t i = 1; i + 1 < grid.n_points; ++i)
      v[i] += phase * std::sin(double(m.n) * pi * grid.node(i) / e.width_a);
  }
  return ComplexField(grid, v);
}

enum class Wall { left, right };

// |dpsi/dx|^2 at a wall from the differentiated series. The endpoint cosine is
// 1 at x = 0 and (-1)^n at x = a.
inline double boundary_flux(const BoxExpansion& e, double t, Wall wall) {
  cdouble slope(0.0, 0.0);
  for (const BoxMode& m : e.modes) {
    const double En = mode_energy(m.n, e.width_a, e.params);
    const double k = double(m.n) * pi / e.width_a;
    const double sign = (wall == Wall::left) ? 1.0 : ((m.n % 2 == 0) ? 1.0 : -1.0);
    slope += m.amplitude * std::exp(cdouble(0.0, -En * t / e.params.hbar)) * k * sign;
  }
  return std::norm(slope);
}

// Beating survival law for a real-amplitude pair (k, n):
//   S(t) = exp{-(lambda_a hbar / m pi) [ (pi^2/a^2)(A_k^2 k^2 + A_n^2 n^2) t
//           - 4 m (-1)^{k+n} k n A_k A_n sin(omega t) / (hbar (n^2-k^2)) ]},
// omega = hbar (n^2-k^2) pi^2 / (2 m a^2). The law counts a single wall's
// flux; lambda_a is read from params.lambda_left.
inline double two_level_survival(int k, int n, double A_k, double A_n, double t,
                                 const PhysicalParams& params, double width_a) {
  if (k == n)
    throw std::invalid_argument("two_level_survival: degenerate pair k == n");
  if (k < 1 || n < 1)
    throw std::invalid_argument("two_level_survival: mode indices must be >= 1");
  if (!(width_a > 0.0))
    throw std::invalid_argument("two_level_survival: width must be positive");
  const double hbar = params.hbar, m = params.mass;
  const double a2 = width_a * width_a;
  const double kk = double(k), nn = double(n);
  const double omega = hbar * (nn * nn - kk * kk) * pi * pi / (2.0 * m * a2);
  const double secular = (pi * pi / a2) * (A_k * A_k * kk * kk + A_n * A_n * nn * nn) * t;
  const double parity = ((k + n) % 2 == 0) ? 1.0 : -1.0;
  const double beat = 4.0 * m * parity * kk * nn * A_k * A_n *
                      std::sin(omega * t) / (hbar * (nn * nn - kk * kk));
  return std::exp(-(params.lambda_left * hbar / (m * pi)) * (secular - beat));
}

// Strongest-beats reduced form for the (1,2) pair at A_1 = A_2 = sqrt(1/2a):
// S = exp{-(lambda_a / 3 pi)(5 tau - 2 sin tau)}, tau = omega_12 t.
inline double reduced_beats_survival(double tau, double lambda_a) {
  if (!(tau >= 0.0)) throw std::invalid_argument("reduced_beats_survival: tau >= 0");
  return std::exp(-(lambda_a / (3.0 * pi)) * (5.0 * tau - 2.0 * std::sin(tau)));
}

// Bohr frequency of the (k, n) pair; the (1,2) value 3 hbar pi^2 / (2 m a^2)
// is the beat frequency of the reduced law above.
inline double bohr_frequency(int k, int n, double width_a,
                             const PhysicalParams& params) {
  return std::abs(mode_energy(n, width_a, params) -
                  mode_energy(k, width_a, params)) / params.hbar;
}

// Probability weights |a_n|^2 = |A_n|^2 a/2 with box energies, for the
// energy-window machinery. Requires a normalized expansion.
inline ModeSpectrum box_mode_spectrum(const BoxExpansion& e) {
  std::vector<double> w(e.modes.size()), en(e.modes.size());
  for (std::size_t i = 0; i < e.modes.size(); ++i) {
    w[i] = std::norm(e.modes[i].amplitude) * e.width_a / 2.0;
    en[i] = mode_energy(e.modes[i].n, e.width_a, e.params);
  }
  return ModeSpectrum(std::move(w), std::move(en));
}

// Energy-window survival: each mode's norm^2 decays at 2 E_share_k / hbar,
// E_share_k = |a_k|^2 E_k, so S(t) = sum |a_k|^2 exp{-2 |a_k|^2 E_k t / hbar}.
inline double energy_window_survival(const ModeSpectrum& spectrum, double t,
                                     const PhysicalParams& params) {
  if (!(t >= 0.0)) throw std::invalid_argument("energy_window_survival: t >= 0");
  double s = 0.0;
  for (std::size_t k = 0; k < spectrum.weights.size(); ++k)
    s += spectrum.weights[k] *
         std::exp(-2.0 * spectrum.energy_share(k) * t / params.hbar);
  return s;
}

// Mode-wise damped series: amplitude of mode k shrinks by exp{-E_share_k t/hbar},
// which makes l2_norm_squared(result) track energy_window_survival exactly.
// spectrum entry i corresponds to expansion coefficient i.
inline ComplexField energy_window_discounted(const BoxExpansion& e,
                                             const ModeSpectrum& spectrum,
                                             const SpaceGrid& grid, double t) {
  if (spectrum.weights.size() != e.modes.size())
    throw std::invalid_argument(
        "energy_window_discounted: spectrum does not match the expansion");
  if (!(t >= 0.0))
    throw std::invalid_argument("energy_window_discounted: t >= 0");
  BoxExpansion damped = e;
  for (std::size_t i = 0; i < damped.modes.size(); ++i)
    damped.modes[i].amplitude *=
        std::exp(-spectrum.energy_share(i) * t / e.params.hbar);
  return evolve(damped, grid, t);
}

// Band-restricted absorption: modes with E_k in [e_low, e_high] decay per the
// energy-window law, the complement evolves unitarily. When the band captures
// no spectral weight the whole state is unitary and `empty` is set.
struct BandSplit {
  ModeSpectrum spectrum;      // lambdas filled for in-band modes, zero outside
  std::vector<bool> in_band;
  bool empty;
};

inline BandSplit band_window_split(const ModeSpectrum& spectrum, double e_low,
                                   double e_high, double lambda_total) {
  if (!(e_low < e_high))
    throw std::invalid_argument("band_window_split: need e_low < e_high");
  BandSplit out{spectrum, std::vector<bool>(spectrum.weights.size(), false), true};
  double band_weight = 0.0;
  for (std::size_t k = 0; k < spectrum.weights.size(); ++k) {
    out.in_band[k] =
        spectrum.energies[k] >= e_low && spectrum.energies[k] <= e_high;
    if (out.in_band[k]) band_weight += spectrum.weights[k] * spectrum.energy_share(k);
  }
  if (band_weight > 0.0) {
    out.empty = false;
    out.spectrum = apportion_lambdas_band(spectrum, lambda_total, e_low, e_high);
  }
  return out;
}

inline double band_window_survival(const BandSplit& split, double t,
                                   const PhysicalParams& params) {
  if (!(t >= 0.0)) throw std::invalid_argument("band_window_survival: t >= 0");
  if (split.empty) return 1.0;
  double s = 0.0;
  for (std::size_t k = 0; k < split.spectrum.weights.size(); ++k) {
    const double decay =
        split.in_band[k]
            ? std::exp(-2.0 * split.spectrum.energy_share(k) * t / params.hbar)
            : 1.0;
    s += split.spectrum.weights[k] * decay;
  }
  return s;
}

// The absorption length at which a lone mode's total-absorption survival
// exp{-kappa * flux * t} coincides with its energy-window decay
// exp{-2 E_1 t / hbar}: solve kappa(lambda) * flux = 2 E_n / hbar.
inline double single_mode_consistency_lambda(int n, double width_a,
                                             const PhysicalParams& params,
                                             int n_walls,
                                             RateConvention conv = RateConvention::pi_m) {
  if (n_walls != 1 && n_walls != 2)
    throw std::invalid_argument("single_mode_consistency_lambda: 1 or 2 walls");
  PhysicalParams p = params;
  p.lambda_left = 0.0;
  p.lambda_right = 0.0;
  std::vector<BoxMode> one{{n, cdouble(std::sqrt(2.0 / width_a), 0.0)}};
  const BoxExpansion lone(width_a, one, p);
  const double flux = boundary_flux(lone, 0.0, Wall::left) * double(n_walls);
  const double window_rate = 2.0 * mode_energy(n, width_a, p) / p.hbar;
  return window_rate / (kappa_factor(p, 1.0, conv) * flux);
}

}  // namespace qabsorb
