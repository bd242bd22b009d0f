#pragma once

// Scalar diagnostics of S-A states. Entropies are in nats.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "decohere/core.hpp"
#include "decohere/qspace.hpp"
#include "decohere/states.hpp"

namespace decohere::measures {

using qspace::DensityMatrix;
using qspace::SpaceLayout;

inline void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim())
    throw LayoutError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

inline double entropy_of_spectrum(const RVector& ev, double floor) {
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > floor) s -= ev(i) * std::log(ev(i));
  return s;
}

inline double vn_entropy(const DensityMatrix& rho, double floor = kDefaultFloor) {
  return entropy_of_spectrum(qspace::eigvalsh(rho.matrix()), floor);
}

// s(rho|sigma) = Tr rho (ln rho - ln sigma), sigma's eigenvalues clipped at `floor`.
inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                               double floor = kDefaultFloor) {
  require_same_dim(rho, sigma);
  if (!(floor > 0.0)) throw ValidationError("relative entropy floor must be positive");
  const double neg_entropy = -entropy_of_spectrum(qspace::eigvalsh(rho.matrix()), floor);
  const CMatrix log_sigma = qspace::hermitian_log(sigma.matrix(), floor);
  const double cross = (rho.matrix().cwiseProduct(log_sigma.transpose())).sum().real();
  return neg_entropy - cross;
}

inline void require_sa(const DensityMatrix& rho, const SpaceLayout& layout) {
  if (layout.env_dim() != 1) throw LayoutError("expected an S-A layout (environment traced out)");
  if (static_cast<std::size_t>(rho.dim()) != layout.sa_dim())
    throw LayoutError("density matrix dimension " + std::to_string(rho.dim()) +
                      " does not match S-A dimension " + std::to_string(layout.sa_dim()));
}

// Zeroes every block <s_i|.|s_j> with i != j.
inline CMatrix system_block_diagonal(const CMatrix& m, const SpaceLayout& layout) {
  const auto na = static_cast<Index>(layout.apparatus_dim());
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  for (Index s = 0; s < static_cast<Index>(layout.system_dim()); ++s)
    out.block(s * na, s * na, na, na) = m.block(s * na, s * na, na, na);
  return out;
}

struct CorrelationSplit {
  double total = 0.0;
  double quantum = 0.0;
  double classical = 0.0;
};

// total = s(rho|rho_S* (x) rho_A*), quantum = s(rho|rho*), classical = s(rho*|rho_S* (x) rho_A*),
// with rho* the system-block-diagonal truncation and rho_S*, rho_A* its reductions.
inline CorrelationSplit correlation_split(const DensityMatrix& rho, const SpaceLayout& layout,
                                          double floor = kDefaultFloor) {
  require_sa(rho, layout);
  const qspace::Tolerance loose{.hermiticity = 1e-10, .trace = 1e-8, .positivity = 1e-10};
  const DensityMatrix star(system_block_diagonal(rho.matrix(), layout), loose);
  const auto rs = qspace::partial_trace(star, layout, qspace::Part::System, loose);
  const auto ra = qspace::partial_trace(star, layout, qspace::Part::Apparatus, loose);
  const DensityMatrix product(qspace::kron(rs.matrix(), ra.matrix()), loose);
  return {relative_entropy(rho, product, floor), relative_entropy(rho, star, floor),
          relative_entropy(star, product, floor)};
}

// F = [Tr (sqrt(sigma) rho sqrt(sigma))^(1/2)]^2, clamped into [0, 1].
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma);
  const CMatrix root = qspace::hermitian_sqrt(sigma.matrix());
  const CMatrix inner = root * rho.matrix() * root;
  const RVector ev = qspace::eigvalsh(inner);
  // Round-off eigenvalues of a rank-deficient product would otherwise add ~sqrt(eps) each.
  const double cutoff = static_cast<double>(ev.size()) * std::numeric_limits<double>::epsilon() *
                        std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  double tr = 0.0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff) tr += std::sqrt(ev(i));
  return std::clamp(tr * tr, 0.0, 1.0);
}

inline double bures_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return 2.0 - 2.0 * std::sqrt(fidelity(rho, sigma));
}

inline void require_two_level(const DensityMatrix& rho, const SpaceLayout& layout) {
  require_sa(rho, layout);
  if (layout.system_dim() != 2) throw LayoutError("index ranges are defined for a two-level system");
}

// Sum of |rho_ij|^2 over i in (s1, sector a), j in (s2, sector b): the upper
// system-off-diagonal block only.
inline double q_decoherence(const DensityMatrix& rho, const SpaceLayout& layout) {
  require_two_level(rho, layout);
  const auto n1 = static_cast<Index>(layout.sector_dim(0));
  const auto n2 = static_cast<Index>(layout.sector_dim(1));
  const auto j0 = static_cast<Index>(layout.sa_index(1, 1, 0));
  return rho.matrix().block(0, j0, n1, n2).squaredNorm();
}

namespace detail {
inline double relaxation(const DensityMatrix& rho, const SpaceLayout& layout, double target_a,
                         double target_b) {
  const auto n1 = layout.sector_dim(0), n2 = layout.sector_dim(1);
  double q = 0.0;
  for (std::size_t m = 0; m < n1; ++m) {
    const double d = target_a - rho(static_cast<Index>(layout.sa_index(0, 0, m)),
                                    static_cast<Index>(layout.sa_index(0, 0, m))).real();
    q += d * d;
  }
  for (std::size_t m = 0; m < n2; ++m) {
    const double d = target_b - rho(static_cast<Index>(layout.sa_index(1, 1, m)),
                                    static_cast<Index>(layout.sa_index(1, 1, m))).real();
    q += d * d;
  }
  return q;
}
}  // namespace detail

// Squared deviations of the (s1, a) and (s2, b) diagonals from 1/N1 and 1/N2.
inline double q_relaxation(const DensityMatrix& rho, const SpaceLayout& layout) {
  require_two_level(rho, layout);
  return detail::relaxation(rho, layout, 1.0 / static_cast<double>(layout.sector_dim(0)),
                            1.0 / static_cast<double>(layout.sector_dim(1)));
}

// Same sum with targets |c_k|^2 / N_k, which vanishes at rho_0 for any amplitudes.
inline double q_relaxation_weighted(const DensityMatrix& rho, const SpaceLayout& layout,
                                    const std::vector<Complex>& amplitudes) {
  require_two_level(rho, layout);
  if (amplitudes.size() != 2) throw ValidationError("need two amplitudes");
  return detail::relaxation(rho, layout, std::norm(amplitudes[0]) / static_cast<double>(layout.sector_dim(0)),
                            std::norm(amplitudes[1]) / static_cast<double>(layout.sector_dim(1)));
}

struct PtMinimum {
  double value = 0.0;
  std::size_t negative_count = 0;
};

inline PtMinimum min_pt_eigenvalue(const DensityMatrix& rho, const SpaceLayout& layout,
                                   double tol = 1e-10) {
  require_sa(rho, layout);
  const RVector ev = qspace::eigvalsh(qspace::partial_transpose(rho, layout));
  PtMinimum out{ev.minCoeff(), 0};
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) < -tol) ++out.negative_count;
  return out;
}

// |alpha><alpha| (x) |beta><beta| on S (x) A.
struct ProductState {
  CVector system;
  CVector apparatus;

  CMatrix density() const {
    return qspace::kron(CMatrix(system * system.adjoint()), CMatrix(apparatus * apparatus.adjoint()));
  }
};

// One-sided difference [f(h) - f(0)]/h of f(x) = s(rho | (1-x) rho* + x sigma).
inline double nearest_separable_derivative(const states::PureMixedParams& params,
                                           const ProductState& sigma, double h = 1e-6,
                                           double floor = kDefaultFloor) {
  const auto& layout = params.layout();
  if (static_cast<std::size_t>(sigma.system.size()) != layout.system_dim() ||
      static_cast<std::size_t>(sigma.apparatus.size()) != layout.apparatus_dim())
    throw LayoutError("product state factors do not match the S-A layout");
  if (std::abs(sigma.system.norm() - 1.0) > 1e-12 || std::abs(sigma.apparatus.norm() - 1.0) > 1e-12)
    throw ValidationError("product state factors must be unit vectors");
  if (!(h > 0.0 && h <= 1e-3)) throw ValidationError("difference step must lie in (0, 1e-3]");

  const DensityMatrix rho = states::build_pure_mixed(params);
  const DensityMatrix star = states::build_nearest_separable(params);
  const DensityMatrix mixed((1.0 - h) * star.matrix() + h * sigma.density());
  return (relative_entropy(rho, mixed, floor) - relative_entropy(rho, star, floor)) / h;
}

}  // namespace decohere::measures
