#pragma once

// Two independent numerical oracles: an implicit (Cayley-form) finite-difference
// solver for the time-dependent Schrodinger equation with hard walls, and a
// direct short-time-kernel quadrature propagator over a finite interval with a
// damped oscillatory kernel. Plus the normalized oscillatory Gaussian moments
// that explain why the quadrature propagator pins the wall values to zero.

#include <algorithm>
#include <cstddef>
#include <sstream>

#include "core.hpp"

namespace qabsorb {

/**
 * Solve a tridiagonal system with the Thomas algorithm.
 *
 * @param lower  sub-diagonal, lower[i] multiplies x[i-1] in row i (lower[0] unused)
 * @param diag   main diagonal
 * @param upper  super-diagonal, upper[i] multiplies x[i+1] in row i (last entry unused)
 * @param rhs    right-hand side
 * @throws std::runtime_error on a vanishing pivot
 */
inline std::vector<cdouble> solve_tridiagonal(const std::vector<cdouble>& lower,
                                              const std::vector<cdouble>& diag,
                                              const std::vector<cdouble>& upper,
                                              const std::vector<cdouble>& rhs) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
    throw std::invalid_argument("solve_tridiagonal: inconsistent band sizes");
  std::vector<cdouble> c_star(n), d_star(n), x(n);
  cdouble pivot = diag[0];
  if (std::abs(pivot) == 0.0)
    throw std::runtime_error("solve_tridiagonal: singular pivot");
  c_star[0] = upper[0] / pivot;
  d_star[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c_star[i - 1];
    if (std::abs(pivot) == 0.0)
      throw std::runtime_error("solve_tridiagonal: singular pivot");
    c_star[i] = upper[i] / pivot;
    d_star[i] = (rhs[i] - lower[i] * d_star[i - 1]) / pivot;
  }
  x[n - 1] = d_star[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d_star[i] - c_star[i] * x[i + 1];
  return x;
}

// Hard-wall evolution problem: psi = 0 held at both ends, V sampled per node.
// The initial data must vanish exactly at the walls.
struct DirichletProblem {
  SpaceGrid grid;
  std::vector<double> potential;
  PhysicalParams params;
  ComplexField initial;

  DirichletProblem(const SpaceGrid& g, std::vector<double> V,
                   const PhysicalParams& p, const ComplexField& init)
      : grid(g), potential(std::move(V)), params(p), initial(init) {
    params.validate();
    if (potential.size() != grid.n_points)
      throw std::invalid_argument("DirichletProblem: potential length must equal n_points");
    for (double v : potential)
      if (!is_finite(v)) throw std::invalid_argument("DirichletProblem: non-finite potential");
    if (initial.values.size() != grid.n_points)
      throw std::invalid_argument("DirichletProblem: initial field grid mismatch");
    if (initial.values.front() != cdouble(0.0, 0.0) ||
        initial.values.back() != cdouble(0.0, 0.0))
      throw std::invalid_argument("DirichletProblem: initial data must vanish at the walls");
  }
};

// One-sided 4th-order first derivative at the left end of uniformly sampled data.
// The wall derivative feeds a squared quantity downstream, so the high-order
// stencil is not optional.
inline cdouble one_sided_derivative_left(const std::vector<cdouble>& v, double h) {
  if (v.size() < 5) throw std::invalid_argument("one_sided_derivative_left: need >= 5 nodes");
  return (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
}

inline cdouble one_sided_derivative_right(const std::vector<cdouble>& v, double h) {
  const std::size_t n = v.size();
  if (n < 5) throw std::invalid_argument("one_sided_derivative_right: need >= 5 nodes");
  return (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] +
          3.0 * v[n - 5]) / (12.0 * h);
}

/**
 * Cayley-form implicit time stepper for i hbar psi_t = -(hbar^2/2m) psi_xx + V psi
 * with psi = 0 at both walls. Unitary to round-off: (1 + i H dt/2hbar) psi_new =
 * (1 - i H dt/2hbar) psi_old, solved on the interior nodes only.
 */
class CrankNicolson {
 public:
  CrankNicolson(const DirichletProblem& problem, double dt)
      : grid_(problem.grid), params_(problem.params), dt_(dt),
        psi_(problem.initial.values) {
    if (!(dt > 0.0) || !is_finite(dt))
      throw std::invalid_argument("CrankNicolson: dt must be positive");
    const std::size_t n_in = grid_.n_points - 2;  // interior unknowns
    const double h = grid_.spacing();
    const cdouble i_unit(0.0, 1.0);
    const double kin = params_.hbar * params_.hbar / (2.0 * params_.mass * h * h);
    // H on interior nodes: diag = 2*kin + V, off = -kin.
    const cdouble coef = i_unit * dt_ / (2.0 * params_.hbar);
    lower_.assign(n_in, coef * cdouble(-kin));
    upper_.assign(n_in, coef * cdouble(-kin));
    diag_a_.resize(n_in);
    diag_b_.resize(n_in);
    for (std::size_t i = 0; i < n_in; ++i) {
      const cdouble hd = 2.0 * kin + problem.potential[i + 1];
      diag_a_[i] = 1.0 + coef * hd;   // left-hand operator
      diag_b_[i] = 1.0 - coef * hd;   // right-hand operator
    }
  }

  void step() {
    const std::size_t n_in = psi_.size() - 2;
    std::vector<cdouble> rhs(n_in);
    const cdouble off = -upper_[0];  // -coef*(-kin) reused: rhs off-diagonal = +coef*kin
    for (std::size_t i = 0; i < n_in; ++i) {
      cdouble acc = diag_b_[i] * psi_[i + 1];
      acc += off * psi_[i];      // psi_[0] is the wall zero when i = 0
      acc += off * psi_[i + 2];  // psi_[n-1] is the wall zero when i = n_in-1
      rhs[i] = acc;
    }
    const std::vector<cdouble> interior = solve_tridiagonal(lower_, diag_a_, upper_, rhs);
    for (std::size_t i = 0; i < n_in; ++i) psi_[i + 1] = interior[i];
    psi_.front() = cdouble(0.0, 0.0);
    psi_.back() = cdouble(0.0, 0.0);
  }

  const std::vector<cdouble>& values() const { return psi_; }
  ComplexField field() const { return ComplexField(grid_, psi_); }
  double flux_left() const {
    return std::norm(one_sided_derivative_left(psi_, grid_.spacing()));
  }
  double flux_right() const {
    return std::norm(one_sided_derivative_right(psi_, grid_.spacing()));
  }
  double norm_squared() const { return l2_norm_squared(field()); }

 private:
  SpaceGrid grid_;
  PhysicalParams params_;
  double dt_;
  std::vector<cdouble> psi_;
  std::vector<cdouble> lower_, upper_, diag_a_, diag_b_;
};

// Wall-derivative history of a Crank-Nicolson run, with optional field snapshots.
struct CnEvolution {
  TimeGrid grid;
  std::vector<double> flux_left;    // |dpsi/dx|^2 at x_min per time sample
  std::vector<double> flux_right;   // |dpsi/dx|^2 at x_max per time sample
  std::vector<ComplexField> snapshots;
  std::vector<std::size_t> snapshot_steps;
};

// Evolve and record wall flux at every sample; keep a field snapshot every
// `snapshot_stride` steps (0 = final field only).
inline CnEvolution crank_nicolson_evolve(const DirichletProblem& problem,
                                         const TimeGrid& tgrid,
                                         std::size_t snapshot_stride = 0) {
  CrankNicolson stepper(problem, tgrid.dt);
  CnEvolution out;
  out.grid = tgrid;
  out.flux_left.reserve(tgrid.size());
  out.flux_right.reserve(tgrid.size());
  auto record = [&](std::size_t j) {
    out.flux_left.push_back(stepper.flux_left());
    out.flux_right.push_back(stepper.flux_right());
    const bool want_snapshot =
        (snapshot_stride != 0 && j % snapshot_stride == 0) || j == tgrid.n_steps;
    if (want_snapshot) {
      out.snapshots.push_back(stepper.field());
      out.snapshot_steps.push_back(j);
    }
  };
  record(0);
  for (std::size_t j = 1; j <= tgrid.n_steps; ++j) {
    stepper.step();
    record(j);
  }
  return out;
}

// Short-time kernel for the interval quadrature propagator. The oscillatory
// kernel is damped by exp(-epsilon * m (x-x')^2 / 2 hbar dt); epsilon is the
// dimensionless regularization strength, not a physical parameter.
struct SliceKernel {
  double dt;
  SpaceGrid grid;
  double epsilon;
  PhysicalParams params;
  std::vector<double> potential;  // optional; empty means V = 0

  SliceKernel(double dt_, const SpaceGrid& g, double eps,
              const PhysicalParams& p = PhysicalParams(),
              std::vector<double> V = {})
      : dt(dt_), grid(g), epsilon(eps), params(p), potential(std::move(V)) {
    if (!(dt > 0.0)) throw std::invalid_argument("SliceKernel: dt must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("SliceKernel: epsilon must be positive");
    if (!potential.empty() && potential.size() != grid.n_points)
      throw std::invalid_argument("SliceKernel: potential length must equal n_points");
  }
};

/**
 * N-fold composition of the short-time kernel over [x_min, x_max]:
 *   K_N(x) = sqrt(m / 2 pi i hbar dt) * Int exp{(i - eps) m (x-x')^2 / 2 hbar dt
 *            - i V(x) dt / hbar} K_{N-1}(x') dx'
 * by trapezoid quadrature on the grid. The kernel depends on x - x' only, so
 * each slice is a Toeplitz correlation.
 *
 * Wall values are NOT imposed; the half-range kernel average drives them to
 * zero as dt -> 0, and that decay is an observable of interest.
 *
 * @throws std::runtime_error when the grid cannot resolve the kernel phase
 *         (more than ~pi/2 phase change per spacing at maximal separation).
 */
inline ComplexField feynman_slice_propagate(const SliceKernel& kernel,
                                            const ComplexField& initial,
                                            std::size_t n_slices) {
  if (initial.values.size() != kernel.grid.n_points)
    throw std::invalid_argument("feynman_slice_propagate: initial field grid mismatch");
  const std::size_t n = kernel.grid.n_points;
  const double h = kernel.grid.spacing();
  const double L = kernel.grid.x_max - kernel.grid.x_min;
  const double alpha = kernel.params.mass / (2.0 * kernel.params.hbar * kernel.dt);
  const double max_phase_step = 2.0 * alpha * L * h;
  if (max_phase_step > 0.5 * pi) {
    std::ostringstream msg;
    msg << "feynman_slice_propagate: grid too coarse for the kernel phase: "
        << max_phase_step << " rad per node at maximal separation (limit "
        << 0.5 * pi << "); need n_points >= "
        << static_cast<std::size_t>(4.0 * alpha * L * L / pi) + 2;
    throw std::runtime_error(msg.str());
  }

  // Toeplitz kernel row: k[d] = prefactor * exp((i - eps) alpha (d h)^2).
  const cdouble prefactor =
      std::sqrt(alpha / pi) * std::exp(cdouble(0.0, -0.25 * pi));
  std::vector<cdouble> row(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double u2 = alpha * (static_cast<double>(d) * h) * (static_cast<double>(d) * h);
    row[d] = prefactor * std::exp(cdouble(-kernel.epsilon * u2, u2));
  }

  std::vector<cdouble> cur = initial.values, next(n);
  for (std::size_t s = 0; s < n_slices; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      cdouble acc(0.0, 0.0);
      // trapezoid: end nodes at half weight
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t d = i > j ? i - j : j - i;
        cdouble term = row[d] * cur[j];
        if (j == 0 || j == n - 1) term *= 0.5;
        acc += term;
      }
      next[i] = acc * h;
    }
    if (!kernel.potential.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        const double phase = -kernel.potential[i] * kernel.dt / kernel.params.hbar;
        next[i] *= std::exp(cdouble(0.0, phase));
      }
    }
    cur.swap(next);
  }
  for (const cdouble& z : cur)
    if (!is_finite(z))
      throw std::runtime_error("feynman_slice_propagate: non-finite amplitude (diverged)");
  return ComplexField(kernel.grid, cur);
}

namespace detail {

// Tail integral T_n(X) = Int_X^inf u^n exp(-s u^2) du for real X > 0,
// Re(s) > 0. n = 1, 2 are closed forms; n = 0 uses the asymptotic series
// exp(-sX^2)/(2sX) [1 - 1/(2sX^2) + 3/(4 s^2 X^4) - ...] valid for large |s|X^2.
inline cdouble gauss_tail0_asymptotic(double X, cdouble s) {
  const cdouble w = 1.0 / (2.0 * s * X * X);
  cdouble term(1.0, 0.0), sum(1.0, 0.0);
  for (int j = 1; j <= 20; ++j) {   // term_j = (-1)^j (2j-1)!! w^j
    term *= -w * (2.0 * j - 1.0);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::exp(-s * X * X) / (2.0 * s * X) * sum;
}

}  // namespace detail

// Incomplete oscillatory Gaussian integrals with damping: Re(s) > 0.
//   gauss_half(n, X, s) = Int_0^X u^n exp(-s u^2) du  for real X (any sign).
// n = 0 splits at |X| = 6 between direct adaptive quadrature and the
// asymptotic tail of the full half-line value; n = 1 is exact; n = 2 reduces
// by parts to n = 0.
inline cdouble gauss_half_integral(int n, double X, cdouble s) {
  if (s.real() <= 0.0)
    throw std::invalid_argument("gauss_half_integral: Re(s) must be positive");
  if (X == 0.0) return cdouble(0.0, 0.0);
  if (X < 0.0) {
    // u -> -u parity: odd n flips the integrand sign twice, even n once.
    const cdouble flipped = gauss_half_integral(n, -X, s);
    return (n % 2 == 0) ? -flipped : flipped;
  }
  switch (n) {
    case 0: {
      const cdouble full_half = 0.5 * std::sqrt(pi / s);  // Int_0^inf
      if (X >= 6.0) return full_half - detail::gauss_tail0_asymptotic(X, s);
      const std::function<cdouble(double)> f = [s](double u) {
        return std::exp(-s * u * u);
      };
      return adaptive_integrate<cdouble>(f, 0.0, X, 1e-13);
    }
    case 1:
      return (1.0 - std::exp(-s * X * X)) / (2.0 * s);
    case 2: {
      // Int_0^X u^2 e^{-su^2} du = -X e^{-sX^2}/(2s) + Int_0^X e^{-su^2} du / (2s)
      return (-X * std::exp(-s * X * X) + gauss_half_integral(0, X, s)) / (2.0 * s);
    }
    default:
      throw std::invalid_argument("gauss_half_integral: n must be 0, 1, or 2");
  }
}

/**
 * Normalized n-th moment of the damped oscillatory Gaussian over the scaled
 * window [sqrt(alpha)(a - y), sqrt(alpha)(b - y)]:
 *
 *   m_n = Int u^n exp{(i - eps) u^2} du / N_n,
 *
 * where N_0 = N_1 = full-line integral of exp{(i - eps) u^2} and N_2 = the
 * full-line integral of u^2 exp{(i - eps) u^2} (each moment normalized by its
 * own full-line value; the n = 1 full-line integral vanishes so it shares the
 * n = 0 scale). Limits as alpha -> inf: interior y gives 1, 0, 1; y = b gives
 * m_0 -> 1/2.
 */
inline cdouble fresnel_moment(int n, double alpha, double a, double b, double y,
                              double epsilon) {
  if (n < 0 || n > 2) throw std::invalid_argument("fresnel_moment: n must be 0, 1, or 2");
  if (!(alpha > 0.0)) throw std::invalid_argument("fresnel_moment: alpha must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("fresnel_moment: epsilon must be positive");
  if (!(a < b)) throw std::invalid_argument("fresnel_moment: requires a < b");
  const cdouble s(epsilon, -1.0);  // exp{(i-eps)u^2} = exp{-s u^2}
  const double lo = std::sqrt(alpha) * (a - y);
  const double hi = std::sqrt(alpha) * (b - y);
  const cdouble raw = gauss_half_integral(n, hi, s) - gauss_half_integral(n, lo, s);
  cdouble norm;
  if (n == 2)
    norm = 0.5 * std::sqrt(pi) * std::pow(s, -1.5);
  else
    norm = std::sqrt(pi / s);
  return raw / norm;
}

}  // namespace qabsorb
