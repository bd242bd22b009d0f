#pragma once

// Unitary S-A-E evolution of the pure-mixed state under
//   H = H_S (x) I_A (x) I_E + I_S (x) H_A (x) I_E + I_S (x) I_A (x) H_E + lambda I_S (x) V,
// with V a seeded random real-symmetric matrix on A (x) E, or H_A (x) V_E for
// the non-demolition coupling. hbar = 1 throughout.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "decohere/core.hpp"
#include "decohere/measures.hpp"
#include "decohere/qspace.hpp"
#include "decohere/states.hpp"

namespace decohere::dynamics {

using qspace::DensityMatrix;
using qspace::SpaceLayout;

enum class Coupling { RandomHermitian, NonDemolition };

struct HamiltonianSpec {
  CMatrix h_s;                         // d_s x d_s
  std::vector<double> sector_energies; // one per pointer sector; H_A is degenerate within a sector
  std::vector<double> env_energies;    // diagonal of H_E; its length is the environment dimension
  Coupling coupling = Coupling::RandomHermitian;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

struct FiniteBath {};
struct RenewedBath {
  std::size_t every = 1;  // steps between environment renewals
};
using BathMode = std::variant<FiniteBath, RenewedBath>;

struct TrajectoryRecord {
  double t = 0.0;
  double q_d = 0.0;
  double q_r = 0.0;
  double s_rel_star = 0.0;
  double s_rel_zero = 0.0;
  double bures_star = 0.0;
  double bures_zero = 0.0;
  double min_pt_eig = 0.0;
  std::size_t neg_count = 0;
  double trace_err = 0.0;
  double herm_err = 0.0;

  bool operator==(const TrajectoryRecord&) const = default;
};

// GOE-style real symmetric matrix: off-diagonal N(0,1), diagonal N(0,2), scaled by 1/sqrt(dim).
inline RMatrix random_hermitian(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Index>(dim);
  RMatrix m(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) {
      double x = normal(engine);
      if (i == j) x *= std::sqrt(2.0);
      m(i, j) = m(j, i) = x * scale;
    }
  return m;
}

// Haar-random unit vector from complex Gaussian components.
template <class Engine>
CVector haar_state(std::size_t dim, Engine& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(static_cast<Index>(dim));
  for (Index i = 0; i < v.size(); ++i) {
    const double re = normal(engine);
    const double im = normal(engine);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

// Coupling operator V on A (x) E (before the I_S factor and lambda).
inline RMatrix coupling_operator(const HamiltonianSpec& spec, const SpaceLayout& layout) {
  const std::size_t na = layout.apparatus_dim(), ne = layout.env_dim();
  if (spec.coupling == Coupling::RandomHermitian) return random_hermitian(na * ne, spec.seed);
  const RMatrix ve = random_hermitian(ne, spec.seed);
  RMatrix v = RMatrix::Zero(static_cast<Index>(na * ne), static_cast<Index>(na * ne));
  std::size_t a = 0;
  for (std::size_t k = 0; k < layout.sector_count(); ++k)
    for (std::size_t m = 0; m < layout.sector_dim(k); ++m, ++a)
      v.block(static_cast<Index>(a * ne), static_cast<Index>(a * ne), static_cast<Index>(ne),
              static_cast<Index>(ne)) = spec.sector_energies[k] * ve;
  return v;
}

inline void check_spec(const HamiltonianSpec& spec, const SpaceLayout& layout) {
  const auto ds = static_cast<Index>(layout.system_dim());
  if (spec.h_s.rows() != ds || spec.h_s.cols() != ds)
    throw LayoutError("H_S must be " + std::to_string(ds) + "x" + std::to_string(ds));
  if (spec.sector_energies.size() != layout.sector_count())
    throw LayoutError("need one energy per pointer sector");
  if (spec.env_energies.size() != layout.env_dim())
    throw LayoutError("environment spectrum length " + std::to_string(spec.env_energies.size()) +
                      " does not match environment dimension " + std::to_string(layout.env_dim()));
  if (!(spec.lambda >= 0.0)) throw ValidationError("coupling strength must be non-negative");
  if (qspace::max_asymmetry(spec.h_s) > 1e-12) throw ValidationError("H_S is not Hermitian");
}

inline CMatrix build_hamiltonian(const HamiltonianSpec& spec, const SpaceLayout& layout) {
  check_spec(spec, layout);
  const std::size_t ds = layout.system_dim(), na = layout.apparatus_dim(), ne = layout.env_dim();
  const auto block = static_cast<Index>(na * ne);
  const auto dim = static_cast<Index>(layout.total_dim());
  CMatrix h = CMatrix::Zero(dim, dim);

  const RMatrix v = coupling_operator(spec, layout);
  for (std::size_t s = 0; s < ds; ++s)
    h.block(static_cast<Index>(s) * block, static_cast<Index>(s) * block, block, block) =
        (spec.lambda * v).cast<Complex>();

  for (std::size_t s = 0; s < ds; ++s)
    for (std::size_t r = 0; r < ds; ++r) {
      const Complex hs = spec.h_s(static_cast<Index>(s), static_cast<Index>(r));
      if (hs == Complex(0.0)) continue;
      for (Index x = 0; x < block; ++x) h(static_cast<Index>(s) * block + x, static_cast<Index>(r) * block + x) += hs;
    }

  for (std::size_t s = 0; s < ds; ++s) {
    std::size_t a = 0;
    for (std::size_t k = 0; k < layout.sector_count(); ++k)
      for (std::size_t m = 0; m < layout.sector_dim(k); ++m, ++a)
        for (std::size_t e = 0; e < ne; ++e) {
          const auto i = static_cast<Index>((s * na + a) * ne + e);
          h(i, i) += spec.sector_energies[k] + spec.env_energies[e];
        }
  }
  return h;
}

// exp(-i H t) through one eigendecomposition of H, reused for every t.
class Propagator {
 public:
  explicit Propagator(const CMatrix& h) {
    if (h.rows() != h.cols()) throw LayoutError("Hamiltonian is not square");
    if (qspace::max_asymmetry(h) > 1e-10) throw ValidationError("Hamiltonian is not Hermitian");
    real_ = h.imag().cwiseAbs().maxCoeff() == 0.0;
    if (real_) {
      auto sp = qspace::eigh_real(h.real());
      values_ = std::move(sp.values);
      real_vectors_ = std::move(sp.vectors);
    } else {
      auto sp = qspace::eigh(h);
      values_ = std::move(sp.values);
      complex_vectors_ = std::move(sp.vectors);
    }
  }

  Index dim() const { return values_.size(); }
  bool is_real() const { return real_; }
  const RVector& energies() const { return values_; }

  // V^dagger * states
  CMatrix to_eigenbasis(const CMatrix& states) const {
    check(states);
    if (!real_) return complex_vectors_.adjoint() * states;
    return mix(real_vectors_.transpose(), states);
  }

  // V * diag(exp(-i E t)) * coeffs
  CMatrix from_eigenbasis(const CMatrix& coeffs, double t) const {
    check(coeffs);
    const CMatrix phased = phases(t).asDiagonal() * coeffs;
    if (!real_) return complex_vectors_ * phased;
    return mix(real_vectors_, phased);
  }

  CMatrix apply(const CMatrix& states, double t) const { return from_eigenbasis(to_eigenbasis(states), t); }

  CMatrix matrix(double t) const {
    if (!real_) return complex_vectors_ * phases(t).asDiagonal() * complex_vectors_.adjoint();
    const RVector c = (values_ * t).array().cos().matrix();
    const RVector s = (values_ * t).array().sin().matrix();
    const RMatrix re = real_vectors_ * c.asDiagonal() * real_vectors_.transpose();
    const RMatrix im = real_vectors_ * (-s).asDiagonal() * real_vectors_.transpose();
    CMatrix u(re.rows(), re.cols());
    u.real() = re;
    u.imag() = im;
    return u;
  }

 private:
  CVector phases(double t) const {
    CVector p(values_.size());
    for (Index i = 0; i < p.size(); ++i) p(i) = std::polar(1.0, -values_(i) * t);
    return p;
  }

  static CMatrix mix(const auto& real_matrix, const CMatrix& b) {
    const RMatrix re = real_matrix * b.real();
    const RMatrix im = real_matrix * b.imag();
    CMatrix out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
  }

  void check(const CMatrix& states) const {
    if (states.rows() != values_.size()) throw LayoutError("state dimension does not match the Hamiltonian");
  }

  RVector values_;
  RMatrix real_vectors_;
  CMatrix complex_vectors_;
  bool real_ = false;
};

inline CMatrix propagator(const CMatrix& h, double dt) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  return Propagator(h).matrix(dt);
}

struct EnsembleMember {
  double weight = 0.0;
  CVector state;
};

inline constexpr double kEnsembleThreshold = 1e-14;

// Eigen-ensemble of rho: members with weight above 1e-14.
inline std::vector<EnsembleMember> ensemble_decompose(const DensityMatrix& rho) {
  const auto sp = qspace::eigh(rho.matrix());
  std::vector<EnsembleMember> out;
  for (Index i = 0; i < sp.values.size(); ++i)
    if (sp.values(i) > kEnsembleThreshold) out.push_back({sp.values(i), sp.vectors.col(i)});
  return out;
}

struct EvolveOptions {
  double dt = 1.0;
  std::size_t n_steps = 1;
  std::size_t record_every = 1;
  BathMode bath = FiniteBath{};
  std::uint64_t env_seed = 0;
  double stop_below = 0.0;   // stop once q_d < stop_below * q_d(0); 0 disables
  double neg_tol = 1e-8;     // threshold for counting negative PT eigenvalues
  double abort_tol = 1e-6;   // trace / hermiticity drift that aborts the run
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  CMatrix final_state;  // reduced S-A state at the last record
  std::size_t initial_rank = 0;
};

namespace detail {

class Recorder {
 public:
  Recorder(const states::PureMixedParams& initial, double neg_tol, double abort_tol)
      : layout_(initial.layout()),
        star_(states::build_nearest_separable(initial)),
        zero_(states::build_equimixed_classical(initial.layout(), initial.amplitudes())),
        neg_tol_(neg_tol),
        abort_tol_(abort_tol) {}

  TrajectoryRecord measure(const CMatrix& raw, double t) const {
    TrajectoryRecord r;
    r.t = t;
    r.trace_err = std::abs(raw.trace().real() - 1.0);
    r.herm_err = qspace::max_asymmetry(raw);
    if (!(r.trace_err <= abort_tol_) || !(r.herm_err <= abort_tol_))
      throw InvariantError("S-A state drifted at t=" + std::to_string(t) + ": trace error " +
                           std::to_string(r.trace_err) + ", hermiticity error " + std::to_string(r.herm_err));
    const DensityMatrix rho(raw, tolerance());
    r.q_d = measures::q_decoherence(rho, layout_);
    r.q_r = measures::q_relaxation(rho, layout_);
    r.s_rel_star = measures::relative_entropy(rho, star_);
    r.s_rel_zero = measures::relative_entropy(rho, zero_);
    r.bures_star = measures::bures_distance(rho, star_);
    r.bures_zero = measures::bures_distance(rho, zero_);
    const auto pt = measures::min_pt_eigenvalue(rho, layout_, neg_tol_);
    r.min_pt_eig = pt.value;
    r.neg_count = pt.negative_count;
    return r;
  }

  qspace::Tolerance tolerance() const {
    return {.hermiticity = abort_tol_, .trace = abort_tol_, .positivity = 1e-10};
  }

 private:
  SpaceLayout layout_;
  DensityMatrix star_;
  DensityMatrix zero_;
  double neg_tol_;
  double abort_tol_;
};

inline CMatrix tensor_with_env(const std::vector<EnsembleMember>& members, const CVector& env) {
  const Index sa = members.front().state.size();
  const Index ne = env.size();
  CMatrix out(sa * ne, static_cast<Index>(members.size()));
  for (std::size_t k = 0; k < members.size(); ++k) {
    const double amp = std::sqrt(members[k].weight);
    for (Index i = 0; i < sa; ++i) out.col(static_cast<Index>(k)).segment(i * ne, ne) = amp * members[k].state(i) * env;
  }
  return out;
}

}  // namespace detail

// Evolves (ensemble of `initial`) (x) |e_0> with a precomputed propagator of the
// total Hamiltonian on `layout` (which carries the environment dimension).
inline Trajectory evolve(const states::PureMixedParams& initial, const Propagator& prop,
                         const SpaceLayout& layout, const EvolveOptions& opt) {
  if (!(opt.dt > 0.0)) throw ValidationError("time step must be positive");
  if (opt.n_steps < 1) throw ValidationError("need at least one step");
  if (opt.record_every < 1) throw ValidationError("record interval must be at least 1");
  if (layout.without_environment() != initial.layout())
    throw LayoutError("initial state layout does not match the Hamiltonian layout");
  if (static_cast<std::size_t>(prop.dim()) != layout.total_dim())
    throw LayoutError("propagator dimension does not match layout");
  const auto* renewed = std::get_if<RenewedBath>(&opt.bath);
  if (renewed && renewed->every < 1) throw ValidationError("renewal interval must be at least 1");

  const std::size_t sa = layout.sa_dim(), ne = layout.env_dim();
  std::mt19937_64 env_engine(opt.env_seed);
  const detail::Recorder recorder(initial, opt.neg_tol, opt.abort_tol);

  const auto members = ensemble_decompose(states::build_pure_mixed(initial));
  CMatrix psi = detail::tensor_with_env(members, haar_state(ne, env_engine));

  Trajectory traj;
  traj.initial_rank = members.size();
  CMatrix rho = qspace::reduce_trailing(psi, sa, ne);
  traj.records.push_back(recorder.measure(rho, 0.0));
  const double q_d0 = traj.records.front().q_d;

  const CMatrix coeffs = renewed ? CMatrix() : prop.to_eigenbasis(psi);
  for (std::size_t step = 1; step <= opt.n_steps; ++step) {
    const double t = static_cast<double>(step) * opt.dt;
    const bool record = step % opt.record_every == 0;
    bool have_rho = false;
    if (renewed) {
      psi = prop.apply(psi, opt.dt);
      if (step % renewed->every == 0) {
        rho = qspace::reduce_trailing(psi, sa, ne);
        have_rho = true;
        const DensityMatrix current(rho, recorder.tolerance());
        psi = detail::tensor_with_env(ensemble_decompose(current), haar_state(ne, env_engine));
      }
    } else if (record) {
      psi = prop.from_eigenbasis(coeffs, t);
    }
    if (!record) continue;
    if (!have_rho) rho = qspace::reduce_trailing(psi, sa, ne);
    traj.records.push_back(recorder.measure(rho, t));
    if (opt.stop_below > 0.0 && traj.records.back().q_d < opt.stop_below * q_d0) break;
  }
  traj.final_state = rho;
  return traj;
}

inline Trajectory evolve(const states::PureMixedParams& initial, const HamiltonianSpec& spec,
                         const EvolveOptions& opt) {
  const SpaceLayout layout = initial.layout().with_environment(spec.env_energies.size());
  const Propagator prop(build_hamiltonian(spec, layout));
  return evolve(initial, prop, layout, opt);
}

}  // namespace decohere::dynamics
