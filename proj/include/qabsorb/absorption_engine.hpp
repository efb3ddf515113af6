#pragma once

// Discounting machinery shared by every geometry: boundary-flux histories in,
// survival probabilities, conditional survivals, discounted fields, absorption
// currents, energy-apportioned absorption strengths, and multi-particle
// composition out.

#include "core.hpp"

namespace qabsorb {

// Flux history of one absorbing wall: |dpsi/dn|^2 per time sample plus the
// wall's absorption length.
struct WallFlux {
  std::string id;
  double lambda = 0.0;
  std::vector<double> values;
};

// All wall histories share one time grid.
struct FluxSeries {
  TimeGrid grid;
  std::vector<WallFlux> per_wall;

  FluxSeries(const TimeGrid& g, std::vector<WallFlux> walls)
      : grid(g), per_wall(std::move(walls)) {
    for (const WallFlux& w : per_wall) {
      if (w.values.size() != grid.size())
        throw std::invalid_argument("FluxSeries: wall '" + w.id +
                                    "' history does not match the time grid");
      if (!(w.lambda >= 0.0) || !is_finite(w.lambda))
        throw std::invalid_argument("FluxSeries: wall '" + w.id +
                                    "' has an invalid absorption length");
      for (double f : w.values)
        if (!(f >= 0.0) || !is_finite(f))
          throw std::invalid_argument("FluxSeries: wall '" + w.id +
                                      "' has a negative or non-finite flux sample");
    }
  }
};

// S(t_j) together with its cumulative exponent E(t_j); S = exp(-E) exactly,
// which makes the semigroup identities below exact in floating arithmetic.
struct SurvivalSeries {
  TimeGrid grid;
  std::vector<double> S;
  std::vector<double> exponent;

  double exponent_at(double t) const { return exponent[index_of(t)]; }
  double survival_at(double t) const { return S[index_of(t)]; }

  std::size_t index_of(double t) const {
    const double pos = (t - grid.t0) / grid.dt;
    const double rounded = std::round(pos);
    if (std::abs(pos - rounded) > 1e-9 * std::max(1.0, std::abs(pos)) ||
        rounded < 0.0 || rounded > static_cast<double>(grid.n_steps))
      throw std::domain_error("SurvivalSeries: time is not a grid sample");
    return static_cast<std::size_t>(rounded);
  }
};

// S(t) = exp{-kappa * sum_wall lambda_wall Int_0^t flux_wall dt'} with the
// cumulative integral taken by the trapezoid rule on the shared grid.
inline SurvivalSeries survival_from_flux(const FluxSeries& flux,
                                         const PhysicalParams& params,
                                         RateConvention conv = RateConvention::pi_m) {
  params.validate();
  const std::size_t n = flux.grid.size();
  std::vector<double> weighted(n, 0.0);
  for (const WallFlux& w : flux.per_wall) {
    const double kappa = kappa_factor(params, w.lambda, conv);
    for (std::size_t j = 0; j < n; ++j) weighted[j] += kappa * w.values[j];
  }
  SurvivalSeries out;
  out.grid = flux.grid;
  out.exponent = cumulative_trapezoid(weighted, flux.grid.dt);
  out.S.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.S[j] = std::exp(-out.exponent[j]);
  return out;
}

// exp(-(E(t2) - E(t1))): survival over [t1, t2] given survival to t1.
// Satisfies S(t2) = S(t1) * conditional_survival(s, t1, t2) exactly.
inline double conditional_survival(const SurvivalSeries& s, double t1, double t2) {
  if (t1 > t2) throw std::domain_error("conditional_survival: t1 > t2");
  return std::exp(-(s.exponent_at(t2) - s.exponent_at(t1)));
}

// Discounted field sqrt(S(t)) * psi.
inline ComplexField discount(const ComplexField& field, const SurvivalSeries& s,
                             double t) {
  const double root = std::sqrt(s.survival_at(t));
  ComplexField out = field;
  for (cdouble& v : out.values) v *= root;
  return out;
}

// Absorption current J(t_j) = kappa * sum_wall lambda_wall flux_wall(t_j) * S(t_j),
// the rate d[1-S]/dt evaluated on the grid.
inline std::vector<double> absorption_current(const FluxSeries& flux,
                                              const SurvivalSeries& s,
                                              const PhysicalParams& params,
                                              RateConvention conv = RateConvention::pi_m) {
  if (flux.grid.size() != s.grid.size())
    throw std::invalid_argument("absorption_current: grids are not aligned");
  const std::size_t n = flux.grid.size();
  std::vector<double> current(n, 0.0);
  for (const WallFlux& w : flux.per_wall) {
    const double kappa = kappa_factor(params, w.lambda, conv);
    for (std::size_t j = 0; j < n; ++j) current[j] += kappa * w.values[j];
  }
  for (std::size_t j = 0; j < n; ++j) current[j] *= s.S[j];
  return current;
}

// Current density at one boundary point: kappa * |dpsi/dn|^2(x, t_j) * S(t_j),
// plus its running time integral (the cumulative arrival pattern at x).
struct PointCurrent {
  std::vector<double> density;
  std::vector<double> cumulative;
};

inline PointCurrent pointwise_boundary_current(const std::vector<double>& point_flux,
                                               const SurvivalSeries& s,
                                               double lambda,
                                               const PhysicalParams& params,
                                               RateConvention conv = RateConvention::pi_m) {
  if (point_flux.size() != s.grid.size())
    throw std::invalid_argument("pointwise_boundary_current: history does not match grid");
  const double kappa = kappa_factor(params, lambda, conv);
  PointCurrent out;
  out.density.resize(point_flux.size());
  for (std::size_t j = 0; j < point_flux.size(); ++j) {
    if (!(point_flux[j] >= 0.0) || !is_finite(point_flux[j]))
      throw std::invalid_argument("pointwise_boundary_current: invalid flux sample");
    out.density[j] = kappa * point_flux[j] * s.S[j];
  }
  out.cumulative = cumulative_trapezoid(out.density, s.grid.dt);
  return out;
}

// A discrete spectrum |a_k|^2 over energies E_k with per-mode absorption
// strengths; amplitudes must carry unit total weight.
struct ModeSpectrum {
  std::vector<double> weights;   // |a_k|^2
  std::vector<double> energies;  // E_k
  std::vector<double> lambdas;   // per-mode absorption strengths (assigned here)

  ModeSpectrum(std::vector<double> w, std::vector<double> e)
      : weights(std::move(w)), energies(std::move(e)), lambdas(weights.size(), 0.0) {
    if (weights.empty() || weights.size() != energies.size())
      throw std::invalid_argument("ModeSpectrum: weights/energies size mismatch");
    double total = 0.0;
    for (double w_ : weights) {
      if (!(w_ >= 0.0) || !is_finite(w_))
        throw std::invalid_argument("ModeSpectrum: weights must be non-negative");
      total += w_;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("ModeSpectrum: weights must sum to one");
    for (double e_ : energies)
      if (!is_finite(e_) || e_ < 0.0)
        throw std::invalid_argument("ModeSpectrum: energies must be non-negative");
  }

  // Energy share of mode k and the mean share.
  double energy_share(std::size_t k) const { return weights[k] * energies[k]; }
  double mean_share() const {
    double m = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k)
      m += weights[k] * energy_share(k);
    return m;
  }
};

// lambda_k = lambda * share_k / <share>, so each mode absorbs in proportion to
// its energy share while sum |a_k|^2 lambda_k = lambda.
inline ModeSpectrum apportion_lambdas(const ModeSpectrum& spectrum,
                                      double lambda_total) {
  if (!(lambda_total >= 0.0) || !is_finite(lambda_total))
    throw std::invalid_argument("apportion_lambdas: lambda must be non-negative");
  const double mean = spectrum.mean_share();
  if (mean <= 0.0)
    throw std::domain_error("apportion_lambdas: degenerate spectrum, <E> = 0");
  ModeSpectrum out = spectrum;
  for (std::size_t k = 0; k < out.weights.size(); ++k)
    out.lambdas[k] = lambda_total * out.energy_share(k) / mean;
  return out;
}

// Band variant: only modes with E_k in [e_lo, e_hi] absorb; the mean share is
// band-restricted so the normalization identity holds over the band.
inline ModeSpectrum apportion_lambdas_band(const ModeSpectrum& spectrum,
                                           double lambda_total, double e_lo,
                                           double e_hi) {
  if (!(lambda_total >= 0.0) || !is_finite(lambda_total))
    throw std::invalid_argument("apportion_lambdas_band: lambda must be non-negative");
  if (!(e_lo <= e_hi))
    throw std::invalid_argument("apportion_lambdas_band: empty band bounds");
  double mean = 0.0;
  for (std::size_t k = 0; k < spectrum.weights.size(); ++k)
    if (spectrum.energies[k] >= e_lo && spectrum.energies[k] <= e_hi)
      mean += spectrum.weights[k] * spectrum.energy_share(k);
  if (mean <= 0.0)
    throw std::domain_error("apportion_lambdas_band: no spectral weight in band");
  ModeSpectrum out = spectrum;
  for (std::size_t k = 0; k < out.weights.size(); ++k) {
    const bool in_band =
        spectrum.energies[k] >= e_lo && spectrum.energies[k] <= e_hi;
    out.lambdas[k] =
        in_band ? lambda_total * spectrum.energy_share(k) / mean : 0.0;
  }
  return out;
}

// Two non-interacting particles: instantaneous absorption rates add.
inline double two_particle_rate(double rate1, double rate2) {
  if (!(rate1 >= 0.0) || !(rate2 >= 0.0))
    throw std::invalid_argument("two_particle_rate: rates must be non-negative");
  return rate1 + rate2;
}

// Joint survival of independent particles: exponents add, so the product is
// exact whenever both series share a grid.
inline SurvivalSeries joint_survival(const SurvivalSeries& s1,
                                     const SurvivalSeries& s2) {
  if (s1.grid.size() != s2.grid.size() || s1.grid.dt != s2.grid.dt ||
      s1.grid.t0 != s2.grid.t0)
    throw std::invalid_argument("joint_survival: grids differ");
  SurvivalSeries out;
  out.grid = s1.grid;
  out.exponent.resize(s1.exponent.size());
  out.S.resize(s1.S.size());
  for (std::size_t j = 0; j < out.exponent.size(); ++j) {
    out.exponent[j] = s1.exponent[j] + s2.exponent[j];
    out.S[j] = std::exp(-out.exponent[j]);
  }
  return out;
}

}  // namespace qabsorb
