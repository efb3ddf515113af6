#pragma once

// Separable 2D slit geometry: a Gaussian packet travels in x toward an
// absorbing screen at x = 0 while the transverse factor spreads in y. Covers
// the free Gaussian-slit density, instantaneous and cumulative screen
// patterns, the Feynman-comparison relative brightness, and the variant with
// two parallel absorbing walls at y = +-y0 (hard-wall sine series, arrival
// histograms).

#include <algorithm>

#include "core.hpp"
#include "packet_analytic.hpp"

namespace qabsorb {

// Slit of fixed half-width pi/2 at x = x0 (distance x0 from the screen),
// initial widths sigma_x/sigma_y, mean approach speed v0. lambda_screen is
// the screen's absorption length; lambda_lateral that of each wall at +-y0.
struct SlitConfig {
  double sigma_x;
  double sigma_y;
  double x0;
  double v0;
  double y0 = 2.0;
  double lambda_screen = 1.0;
  double lambda_lateral = 1.0;
  PhysicalParams params;

  SlitConfig(double sx, double sy, double x0_, double v0_, double y0_,
             double lam_screen, double lam_lateral, const PhysicalParams& p)
      : sigma_x(sx), sigma_y(sy), x0(x0_), v0(v0_), y0(y0_),
        lambda_screen(lam_screen), lambda_lateral(lam_lateral), params(p) {
    params.validate();
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0))
      throw std::invalid_argument("SlitConfig: packet widths must be positive");
    if (!(x0 > 0.0) || !(v0 > 0.0))
      throw std::invalid_argument("SlitConfig: x0 and v0 must be positive");
    if (!(sigma_x < x0 / 5.0))
      throw std::invalid_argument("SlitConfig: need sigma_x << x0 (sigma_x < x0/5)");
    if (!(lambda_screen >= 0.0) || !(lambda_lateral >= 0.0))
      throw std::invalid_argument("SlitConfig: absorption lengths must be >= 0");
  }

  // Classical arrival time at the screen.
  double arrival_time() const { return x0 / v0; }

  void require_lateral() const {
    if (!(y0 > pi / 2.0))
      throw std::invalid_argument("SlitConfig: lateral walls need y0 > pi/2");
  }
};

// x-motion of the slit packet as a half-line absorber problem: |psi|^2 width
// sigma_x corresponds to envelope parameter a = 2 sigma_x, and the mean
// momentum is m v0 / hbar. The screen's lambda rides on lambda_left.
inline GaussianPacketParams packet_for_slit(const SlitConfig& cfg) {
  PhysicalParams p = cfg.params;
  p.lambda_left = cfg.lambda_screen;
  p.lambda_right = 0.0;
  return GaussianPacketParams(2.0 * cfg.sigma_x, cfg.x0,
                              cfg.params.mass * cfg.v0 / cfg.params.hbar, p);
}

// Freely propagating Gaussian-slit transverse density
//   |psi2(y,t)|^2 = (1/2 pi sigma_y) D(t)^{-1/2} e^{-y^2/D(t)},
//   D(t) = hbar^2 t^2 / (sigma_y^2 m^2) + sigma_y^2.
// Its y-mass is 1/(2 sqrt(pi) sigma_y), constant in t.
inline double gaussian_slit_density(double y, double t, const SlitConfig& cfg) {
  if (!(t >= 0.0)) throw std::invalid_argument("gaussian_slit_density: t >= 0");
  const double hbar = cfg.params.hbar, m = cfg.params.mass, sy = cfg.sigma_y;
  const double D = hbar * hbar * t * t / (sy * sy * m * m) + sy * sy;
  return std::exp(-y * y / D) / (2.0 * pi * sy * std::sqrt(D));
}

inline double slit_y_mass(const SlitConfig& cfg) {
  return 1.0 / (2.0 * std::sqrt(pi) * cfg.sigma_y);
}

// Unit-mass transverse profile: gaussian_slit_density / slit_y_mass.
inline double unit_slit_density(double y, double t, const SlitConfig& cfg) {
  return gaussian_slit_density(y, t, cfg) / slit_y_mass(cfg);
}

// Cumulative screen exponent Int_0^t kappa |dpsi1/dx(0,t')|^2 dt', evaluated
// with breakpoints around the arrival bump so the adaptive sampler cannot
// step over it.
inline double screen_survival_exponent(double t, const GaussianPacketParams& p,
                                       RateConvention conv = RateConvention::pi_m,
                                       double tol = 1e-11) {
  if (!(t >= 0.0)) throw std::invalid_argument("screen_survival_exponent: t >= 0");
  if (t == 0.0 || p.params.lambda_left == 0.0) return 0.0;
  const double tbar = p.arrival_time();
  std::vector<double> brk{0.0};
  for (double b : {0.5 * tbar, tbar, 2.0 * tbar, 4.0 * tbar})
    if (b < t) brk.push_back(b);
  brk.push_back(t);
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < brk.size(); ++i)
    e += adaptive_integrate<double>(
        [&p, conv](double u) { return boundary_flux_rate(u, p, conv); }, brk[i],
        brk[i + 1], tol / double(brk.size()));
  return e;
}

// Dense cumulative exponent table for fast repeated survival lookups. Beyond
// t_max the exponent is clamped to its final value; the residual integral is
// bounded by tail_coefficient / (2 t_max^2) and reported for callers to check.
class ScreenFactor {
 public:
  ScreenFactor(const GaussianPacketParams& packet, RateConvention conv,
               double t_max, std::size_t n_samples)
      : packet_(packet), conv_(conv), dt_(t_max / double(n_samples)) {
    if (!(t_max > 0.0) || n_samples < 2)
      throw std::invalid_argument("ScreenFactor: bad sampling parameters");
    std::vector<double> rate(n_samples + 1);
    for (std::size_t j = 0; j <= n_samples; ++j)
      rate[j] = boundary_flux_rate(double(j) * dt_, packet_, conv_);
    cumulative_ = cumulative_trapezoid(rate, dt_);
    clamp_error_ = flux_tail_coefficient(packet_, conv_) / (2.0 * t_max * t_max);
  }

  double exponent(double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("ScreenFactor: t >= 0");
    const double pos = t / dt_;
    const std::size_t last = cumulative_.size() - 1;
    if (pos >= double(last)) return cumulative_[last];
    const std::size_t j = static_cast<std::size_t>(pos);
    const double frac = pos - double(j);
    return cumulative_[j] + frac * (cumulative_[j + 1] - cumulative_[j]);
  }
  double survival(double t) const { return std::exp(-exponent(t)); }
  double rate(double t) const { return boundary_flux_rate(t, packet_, conv_); }
  double clamp_error() const { return clamp_error_; }
  const GaussianPacketParams& packet() const { return packet_; }
  RateConvention convention() const { return conv_; }

 private:
  GaussianPacketParams packet_;
  RateConvention conv_;
  double dt_;
  std::vector<double> cumulative_;
  double clamp_error_;
};

inline ScreenFactor make_screen_factor(const GaussianPacketParams& packet,
                                       RateConvention conv = RateConvention::pi_m) {
  const double horizon = 300.0 * std::max(packet.arrival_time(), 1.0);
  return ScreenFactor(packet, conv, horizon, 3000000);
}

// Instantaneous pattern on the screen:
//   J(y, t) = kappa |dpsi1/dx(0,t)|^2 S_x(t) * yhat(y, t),
// with yhat the unit-mass transverse profile, so the t- and y-integrated
// pattern carries exactly the absorbed fraction 1 - R.
inline double screen_current(double y, double t, const SlitConfig& cfg,
                             const ScreenFactor& factor) {
  return factor.rate(t) * factor.survival(t) * unit_slit_density(y, t, cfg);
}

// Convenience overload that recomputes the exponent by quadrature; suited to
// single evaluations rather than t-sweeps.
inline double screen_current(double y, double t, const SlitConfig& cfg,
                             const GaussianPacketParams& packet,
                             RateConvention conv = RateConvention::pi_m) {
  const double S = std::exp(-screen_survival_exponent(t, packet, conv));
  return boundary_flux_rate(t, packet, conv) * S * unit_slit_density(y, t, cfg);
}

// Probability density that the particle is ever absorbed at screen point y:
// Int_0^infty J(y,t) dt. Its y-integral equals 1 - R up to quadrature error.
inline double cumulative_pattern(double y, const SlitConfig& cfg,
                                 const ScreenFactor& factor,
                                 double abs_tol = 1e-9) {
  if (factor.packet().params.lambda_left == 0.0) return 0.0;
  const double tail_coeff = flux_tail_coefficient(factor.packet(), factor.convention()) /
                            (std::sqrt(pi) * cfg.sigma_y);
  const std::function<double(double)> f = [&](double t) {
    return screen_current(y, t, cfg, factor);
  };
  const ImproperIntegral r = integrate_to_infinity(
      f, std::max(factor.packet().arrival_time(), 1e-3), tail_coeff, abs_tol);
  return r.value + 0.5 * r.tail_bound;
}

// Concentrated-velocity approximation: the cumulative pattern is close to the
// instantaneous pattern at the classical arrival time.
inline double concentrated_velocity_pattern(double y, const SlitConfig& cfg,
                                            const ScreenFactor& factor) {
  return screen_current(y, cfg.arrival_time(), cfg, factor);
}

// Free-space (no screen) x-factor of the comparison density:
//   F_x(t) = (1/2 pi sigma_x) Dx(t)^{-1/2} e^{-x0^2/Dx(t)},
//   Dx(t) = hbar^2 t^2/(sigma_x^2 m^2) + sigma_x^2.
inline double feynman_x_factor(double t, const SlitConfig& cfg) {
  if (!(t >= 0.0)) throw std::invalid_argument("feynman_x_factor: t >= 0");
  const double hbar = cfg.params.hbar, m = cfg.params.mass, sx = cfg.sigma_x;
  const double Dx = hbar * hbar * t * t / (sx * sx * m * m) + sx * sx;
  return std::exp(-cfg.x0 * cfg.x0 / Dx) / (2.0 * pi * sx * std::sqrt(Dx));
}

// Screen-free reference density |psi_F(0, y, t)|^2 = F_x(t) |psi2(y,t)|^2.
inline double feynman_density(double y, double t, const SlitConfig& cfg) {
  return feynman_x_factor(t, cfg) * gaussian_slit_density(y, t, cfg);
}

// Relative brightness lambda |dPsi(0,y,t)/dx|^2 / |psi_F(0,y,t)|^2. The
// transverse factor cancels, leaving a function of time only; the survival
// factor in the numerator is what depresses late arrivals.
inline double relative_brightness(double t, const SlitConfig& cfg,
                                  const ScreenFactor& factor) {
  const GaussianPacketParams& p = factor.packet();
  const double num = p.params.lambda_left * wall_derivative_squared(t, p) *
                     factor.survival(t);
  return num / feynman_x_factor(t, cfg);
}

// Same ratio computed at an explicit y, for checking the y-independence.
inline double relative_brightness_at(double y, double t, const SlitConfig& cfg,
                                     const ScreenFactor& factor) {
  const GaussianPacketParams& p = factor.packet();
  const double num = p.params.lambda_left * wall_derivative_squared(t, p) *
                     factor.survival(t) * gaussian_slit_density(y, t, cfg);
  return num / feynman_density(y, t, cfg);
}

// ---------------------------------------------------------------------------
// Lateral absorbing walls at y = +-y0 (hard-wall sine series).

// Initial transverse velocity density through the slit: |sinc(pi k / 2)|^2.
inline double slit_velocity_density(double k) {
  const double u = pi * k / 2.0;
  if (std::abs(u) < 1e-8) {
    const double s = 1.0 - u * u / 6.0;  // series for sin(u)/u near zero
    return s * s;
  }
  const double s = std::sin(u) / u;
  return s * s;
}

namespace detail {

// Series coefficient c_n = (2 / n pi^{3/2}) cos(n pi^2 / 4 y0).
inline double lateral_coefficient(int n, double y0) {
  return 2.0 / (double(n) * std::pow(pi, 1.5)) *
         std::cos(double(n) * pi * pi / (4.0 * y0));
}

// Phase rate of mode n: theta_n = n^2 pi^2 / (hbar y0^2) as quoted, or the
// dispersion-consistent E_n / hbar = hbar n^2 pi^2 / (2 m y0^2).
inline double lateral_theta(int n, const SlitConfig& cfg, bool consistent_energies) {
  const double n2p2 = double(n) * double(n) * pi * pi / (cfg.y0 * cfg.y0);
  if (consistent_energies) return cfg.params.hbar * n2p2 / (2.0 * cfg.params.mass);
  return n2p2 / cfg.params.hbar;
}

}  // namespace detail

// Transverse series between the lateral walls:
//   psi2(y,t) = sum_n c_n sin(n pi y / y0) e^{-i theta_n t}.
// Exactly zero at y = +-y0. The quoted theta_n omits the usual hbar/2m; the
// consistent_energies flag substitutes the dispersion-consistent rate.
inline cdouble lateral_psi2(double y, double t, const SlitConfig& cfg, int n_max,
                            bool consistent_energies = false) {
  cfg.require_lateral();
  if (n_max < 1) throw std::invalid_argument("lateral_psi2: n_max >= 1");
  if (std::abs(y) > cfg.y0) throw std::invalid_argument("lateral_psi2: |y| <= y0");
  if (std::abs(y) == cfg.y0) return cdouble(0.0, 0.0);
  cdouble sum(0.0, 0.0);
  for (int n = 1; n <= n_max; ++n) {
    const double c = detail::lateral_coefficient(n, cfg.y0);
    const double th = detail::lateral_theta(n, cfg, consistent_energies);
    sum += c * std::sin(double(n) * pi * y / cfg.y0) *
           std::exp(cdouble(0.0, -th * t));
  }
  return sum;
}

// Energy-window variant of the series: each mode additionally damped by
// exp{-lambda n^2 pi^2 t / y0^2}, with the quoted damping constant carried
// as written (lambda in a rate position).
inline cdouble lateral_psi2_energy_window(double y, double t,
                                          const SlitConfig& cfg, int n_max,
                                          double lambda,
                                          bool consistent_energies = false) {
  cfg.require_lateral();
  if (n_max < 1) throw std::invalid_argument("lateral_psi2_energy_window: n_max >= 1");
  if (std::abs(y) > cfg.y0)
    throw std::invalid_argument("lateral_psi2_energy_window: |y| <= y0");
  if (std::abs(y) == cfg.y0) return cdouble(0.0, 0.0);
  cdouble sum(0.0, 0.0);
  for (int n = 1; n <= n_max; ++n) {
    const double c = detail::lateral_coefficient(n, cfg.y0);
    const double th = detail::lateral_theta(n, cfg, consistent_energies);
    const double damp = lambda * double(n) * double(n) * pi * pi /
                        (cfg.y0 * cfg.y0) * t;
    sum += c * std::sin(double(n) * pi * y / cfg.y0) *
           std::exp(cdouble(-damp, -th * t));
  }
  return sum;
}

// |dpsi2/dy|^2 at either lateral wall. The endpoint cosine is (-1)^n at both
// walls, so the two wall fluxes coincide identically.
inline double lateral_wall_flux(double t, const SlitConfig& cfg, int n_max,
                                bool consistent_energies = false) {
  cfg.require_lateral();
  if (n_max < 1) throw std::invalid_argument("lateral_wall_flux: n_max >= 1");
  cdouble slope(0.0, 0.0);
  for (int n = 1; n <= n_max; ++n) {
    const double c = detail::lateral_coefficient(n, cfg.y0) *
                     (double(n) * pi / cfg.y0) * ((n % 2 == 0) ? 1.0 : -1.0);
    const double th = detail::lateral_theta(n, cfg, consistent_energies);
    slope += c * std::exp(cdouble(0.0, -th * t));
  }
  return std::norm(slope);
}

// Exact cumulative wall-flux integral Int_0^t |dpsi2/dy(y0,t')|^2 dt' from the
// pairwise mode expansion (no quadrature): diagonal terms grow linearly, cross
// terms contribute bounded beats.
inline double lateral_flux_integral(double t, const SlitConfig& cfg, int n_max,
                                    bool consistent_energies = false) {
  cfg.require_lateral();
  if (!(t >= 0.0)) throw std::invalid_argument("lateral_flux_integral: t >= 0");
  std::vector<double> c(n_max + 1), th(n_max + 1);
  for (int n = 1; n <= n_max; ++n) {
    c[n] = detail::lateral_coefficient(n, cfg.y0) * (double(n) * pi / cfg.y0) *
           ((n % 2 == 0) ? 1.0 : -1.0);
    th[n] = detail::lateral_theta(n, cfg, consistent_energies);
  }
  double sum = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    sum += c[n] * c[n] * t;
    for (int m = n + 1; m <= n_max; ++m)
      sum += 2.0 * c[n] * c[m] * std::sin((th[n] - th[m]) * t) / (th[n] - th[m]);
  }
  return sum;
}

// Survival against both lateral walls: S_y(t) = exp{-2 kappa_w * flux integral}.
inline double lateral_survival(double t, const SlitConfig& cfg, int n_max,
                               RateConvention conv = RateConvention::pi_m,
                               bool consistent_energies = false) {
  const double kappa = kappa_factor(cfg.params, cfg.lambda_lateral, conv);
  return std::exp(-2.0 * kappa *
                  lateral_flux_integral(t, cfg, n_max, consistent_energies));
}

enum class WallPatternMode { verbatim, flux };

// Pattern on a lateral wall at distance x from the screen plane (x measured
// along the wall toward the slit, 0 <= x).
//
// verbatim mode evaluates Int |dpsi1/dx(x,t)|^2 |psi2(+-y0,t)|^2 dt as
// written; the sine series vanishes at the walls, so the result is
// identically zero. flux mode replaces the degenerate transverse factor by
// the wall flux with its absorption weighting and survival,
//   Int_0^infty |dpsi1/dx(x,t)|^2 kappa_w |dpsi2/dy(y0,t)|^2 S_y(t) dt,
// which is the usable observable.
inline double lateral_wall_pattern(double x, const SlitConfig& cfg,
                                   const GaussianPacketParams& packet,
                                   int n_max,
                                   WallPatternMode mode = WallPatternMode::flux,
                                   RateConvention conv = RateConvention::pi_m,
                                   bool consistent_energies = false,
                                   double abs_tol = 1e-9) {
  cfg.require_lateral();
  if (!(x >= 0.0)) throw std::invalid_argument("lateral_wall_pattern: x >= 0");
  if (mode == WallPatternMode::verbatim) return 0.0;
  const double kappa = kappa_factor(cfg.params, cfg.lambda_lateral, conv);
  if (kappa == 0.0) return 0.0;

  // Secular decay rate of S_y and a bound on its beat excursion, for the
  // integration horizon.
  std::vector<double> c(n_max + 1), th(n_max + 1);
  double secular = 0.0, beat_bound = 0.0, flux_sup = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    c[n] = detail::lateral_coefficient(n, cfg.y0) * (double(n) * pi / cfg.y0);
    th[n] = detail::lateral_theta(n, cfg, consistent_energies);
    secular += c[n] * c[n];
    flux_sup += std::abs(c[n]);
  }
  flux_sup *= flux_sup;
  for (int n = 1; n <= n_max; ++n)
    for (int m = n + 1; m <= n_max; ++m)
      beat_bound += 2.0 * std::abs(c[n] * c[m] / (th[n] - th[m]));
  if (secular <= 0.0)
    throw std::runtime_error("lateral_wall_pattern: series carries no wall flux");

  // S_y(t) <= e^{2 kappa B} e^{-2 kappa secular t}; pick T with the tail of
  // kappa * flux_sup * |dpsi1/dx|^2_sup * S_y below tolerance.
  const double gamma = 2.0 * kappa * secular;
  double deriv_sup = 0.0;
  const double tbar = packet.arrival_time();
  for (int j = 0; j <= 400; ++j) {
    const double t = 4.0 * tbar * double(j) / 400.0;
    deriv_sup = std::max(deriv_sup, std::norm(packet_derivative(-x, t, packet)));
  }
  const double amp = kappa * flux_sup * std::max(deriv_sup, 1e-300) *
                     std::exp(2.0 * kappa * beat_bound);
  double horizon = std::max(8.0 * tbar, 1.0);
  while (amp * std::exp(-gamma * horizon) / gamma > 0.5 * abs_tol &&
         horizon < 1e9)
    horizon *= 2.0;

  const std::function<double(double)> f = [&](double t) {
    const double dpsi = std::norm(packet_derivative(-x, t, packet));
    return dpsi * kappa * lateral_wall_flux(t, cfg, n_max, consistent_energies) *
           std::exp(-2.0 * kappa *
                    lateral_flux_integral(t, cfg, n_max, consistent_energies));
  };
  // Panel the horizon so the arrival bump and the beat oscillations are seen.
  const double panel = std::min(std::max(tbar / 4.0, pi / th[n_max]), horizon / 8.0);
  double total = 0.0, left = 0.0;
  while (left < horizon) {
    const double right = std::min(left + panel, horizon);
    total += adaptive_integrate<double>(f, left, right,
                                        abs_tol * 0.5 * (right - left) / horizon);
    left = right;
  }
  return total;
}

// Center-screen arrival histogram, as written:
//   J(y) = Int_0^infty |dpsi1/dx(0,t)|^2 |psi2(y,t)|^2 dt
// (no absorption weighting; a shape, not a normalized density).
inline double lateral_screen_histogram(double y, const SlitConfig& cfg,
                                       const GaussianPacketParams& packet,
                                       int n_max,
                                       bool consistent_energies = false,
                                       double abs_tol = 1e-9) {
  cfg.require_lateral();
  // |psi2|^2 is bounded by the squared coefficient l1-norm; the x-factor
  // supplies the t^-3 envelope.
  double c_sum = 0.0;
  for (int n = 1; n <= n_max; ++n)
    c_sum += std::abs(detail::lateral_coefficient(n, cfg.y0));
  const double tail_coeff = derivative_tail_coefficient(packet) * c_sum * c_sum;
  const std::function<double(double)> f = [&](double t) {
    return wall_derivative_squared(t, packet) *
           std::norm(lateral_psi2(y, t, cfg, n_max, consistent_energies));
  };
  const ImproperIntegral r = integrate_to_infinity(
      f, std::max(packet.arrival_time(), 1e-3), tail_coeff, abs_tol);
  return r.value + 0.5 * r.tail_bound;
}

// Concentrated-velocity form of the histogram: J(y, tbar).
inline double lateral_concentrated_histogram(double y, const SlitConfig& cfg,
                                             const GaussianPacketParams& packet,
                                             int n_max,
                                             bool consistent_energies = false) {
  const double tbar = cfg.arrival_time();
  return wall_derivative_squared(tbar, packet) *
         std::norm(lateral_psi2(y, tbar, cfg, n_max, consistent_energies));
}

// L2 distance squared between the t = 0 partial sum and 1 on the slit
// interior (-pi/2, pi/2); a diagnostic for how well the quoted coefficients
// resolve the initial condition.
inline double slit_indicator_residual(const SlitConfig& cfg, int n_max,
                                      std::size_t n_quad = 8001) {
  cfg.require_lateral();
  const double h = pi / double(n_quad - 1);
  std::vector<double> sq(n_quad);
  for (std::size_t i = 0; i < n_quad; ++i) {
    const double y = -pi / 2.0 + double(i) * h;
    sq[i] = std::norm(lateral_psi2(y, 0.0, cfg, n_max) - 1.0);
  }
  return trapezoid(sq, h);
}

// Sampled pattern for output: coordinate samples (y on the screen, or x along
// a lateral wall) with non-negative finite densities.
struct PatternGrid {
  enum class Kind { instantaneous, cumulative };
  std::vector<double> coordinates;
  std::vector<double> densities;
  Kind kind = Kind::cumulative;
  double at_time = 0.0;  // meaningful for instantaneous patterns

  void validate() const {
    if (coordinates.size() != densities.size() || coordinates.empty())
      throw std::invalid_argument("PatternGrid: size mismatch or empty");
    for (double d : densities)
      if (!is_finite(d) || d < 0.0)
        throw std::invalid_argument("PatternGrid: densities must be finite and >= 0");
  }
};

// Relative L2 change of a sampled lateral pattern when the series order
// doubles; the truncation diagnostic the runner checks against its configured
// series tolerance.
inline double truncation_change(const std::vector<double>& coarse,
                                const std::vector<double>& fine) {
  if (coarse.size() != fine.size() || coarse.empty())
    throw std::invalid_argument("truncation_change: size mismatch or empty");
  double diff2 = 0.0, ref2 = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    diff2 += (fine[i] - coarse[i]) * (fine[i] - coarse[i]);
    ref2 += fine[i] * fine[i];
  }
  if (ref2 == 0.0) return 0.0;
  return std::sqrt(diff2 / ref2);
}

}  // namespace qabsorb
