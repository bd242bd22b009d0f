#pragma once

// The pure-mixed state family: system eigenstates |s_k> correlated with
// mixed apparatus states diag(w_k) on pointer sector k,
//
//   rho = sum_k |c_k|^2 |s_k><s_k| (x) diag(w_k)
//       + sum_{k != l} c_k c_l^* |s_k><s_l| (x) |phi_k><phi_l|,   |phi_k> = sum_m w_k(m) |k_m>,
//
// together with its block-diagonal truncation rho* (nearest separable state),
// the equimixed classical state rho_0, and the two-sector purification.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "decohere/core.hpp"
#include "decohere/qspace.hpp"

namespace decohere::states {

using qspace::DensityMatrix;
using qspace::SpaceLayout;

inline constexpr double kNormTolerance = 1e-12;

// Non-negative weights summing to one. Not renormalized on construction.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw ValidationError("weight vector is empty");
    double sum = 0.0;
    for (double x : w_) {
      if (!(x >= 0.0)) throw ValidationError("weights must be non-negative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kNormTolerance)
      throw ValidationError("weights sum to " + std::to_string(sum) + ", not 1");
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& values() const { return w_; }
  auto begin() const { return w_.begin(); }
  auto end() const { return w_.end(); }

  double sum_of_squares() const {
    double s = 0.0;
    for (double x : w_) s += x * x;
    return s;
  }
  bool is_uniform(double tol = 1e-12) const {
    const double u = 1.0 / static_cast<double>(w_.size());
    for (double x : w_)
      if (std::abs(x - u) > tol) return false;
    return true;
  }

  bool operator==(const WeightVector&) const = default;

 private:
  std::vector<double> w_;
};

inline WeightVector uniform_weights(std::size_t n) {
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

namespace detail {
inline WeightVector normalized(std::vector<double> w) {
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return WeightVector(std::move(w));
}
}  // namespace detail

// w_m proportional to (n - m), m = 0..n-1.
inline WeightVector ramp_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t m = 0; m < n; ++m) w[m] = static_cast<double>(n - m);
  return detail::normalized(std::move(w));
}

// w_m proportional to ratio^m.
inline WeightVector geometric_weights(std::size_t n, double ratio) {
  if (!(ratio > 0.0)) throw ValidationError("geometric weight ratio must be positive");
  std::vector<double> w(n);
  for (std::size_t m = 0; m < n; ++m) w[m] = std::pow(ratio, static_cast<double>(m));
  return detail::normalized(std::move(w));
}

inline void check_amplitudes(const std::vector<Complex>& c) {
  double norm = 0.0;
  for (const auto& x : c) norm += std::norm(x);
  if (std::abs(norm - 1.0) > kNormTolerance)
    throw ValidationError("sum of |c_k|^2 is " + std::to_string(norm) + ", not 1");
}

class PureMixedParams {
 public:
  PureMixedParams(std::vector<Complex> amplitudes, std::vector<WeightVector> weights)
      : amplitudes_(std::move(amplitudes)),
        weights_(std::move(weights)),
        layout_(amplitudes_.size(), sector_dims_of(weights_)) {
    if (amplitudes_.size() != weights_.size())
      throw ValidationError("need one weight vector per amplitude");
    check_amplitudes(amplitudes_);
  }

  const std::vector<Complex>& amplitudes() const { return amplitudes_; }
  const std::vector<WeightVector>& weights() const { return weights_; }
  const WeightVector& weights(std::size_t k) const { return weights_.at(k); }
  Complex amplitude(std::size_t k) const { return amplitudes_.at(k); }
  double probability(std::size_t k) const { return std::norm(amplitudes_.at(k)); }
  std::size_t sector_count() const { return amplitudes_.size(); }
  const SpaceLayout& layout() const { return layout_; }

  bool all_uniform() const {
    for (const auto& w : weights_)
      if (!w.is_uniform()) return false;
    return true;
  }

 private:
  static std::vector<std::size_t> sector_dims_of(const std::vector<WeightVector>& ws) {
    std::vector<std::size_t> d;
    d.reserve(ws.size());
    for (const auto& w : ws) d.push_back(w.size());
    return d;
  }

  std::vector<Complex> amplitudes_;
  std::vector<WeightVector> weights_;
  SpaceLayout layout_;
};

namespace detail {

inline CMatrix assemble(const PureMixedParams& p, bool with_coherences) {
  const auto& layout = p.layout();
  const auto n = static_cast<Index>(layout.sa_dim());
  CMatrix rho = CMatrix::Zero(n, n);
  const std::size_t K = p.sector_count();
  for (std::size_t k = 0; k < K; ++k) {
    const auto& wk = p.weights(k);
    for (std::size_t m = 0; m < wk.size(); ++m) {
      const auto i = static_cast<Index>(layout.sa_index(k, k, m));
      rho(i, i) = p.probability(k) * wk[m];
    }
    if (!with_coherences) continue;
    for (std::size_t l = 0; l < K; ++l) {
      if (l == k) continue;
      const auto& wl = p.weights(l);
      const Complex ckl = p.amplitude(k) * std::conj(p.amplitude(l));
      for (std::size_t m = 0; m < wk.size(); ++m)
        for (std::size_t r = 0; r < wl.size(); ++r)
          rho(static_cast<Index>(layout.sa_index(k, k, m)), static_cast<Index>(layout.sa_index(l, l, r))) =
              ckl * wk[m] * wl[r];
    }
  }
  return rho;
}

}  // namespace detail

inline DensityMatrix build_pure_mixed(const PureMixedParams& p) {
  return DensityMatrix(detail::assemble(p, true));
}

// rho with every block between distinct system indices removed.
inline DensityMatrix build_nearest_separable(const PureMixedParams& p) {
  return DensityMatrix(detail::assemble(p, false));
}

// rho_0 = sum_k |c_k|^2 |s_k><s_k| (x) (uniform mixture over sector k).
inline DensityMatrix build_equimixed_classical(const SpaceLayout& layout,
                                               const std::vector<Complex>& amplitudes) {
  if (amplitudes.size() != layout.sector_count())
    throw ValidationError("need one amplitude per pointer sector");
  check_amplitudes(amplitudes);
  const auto n = static_cast<Index>(layout.sa_dim());
  CMatrix rho = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < layout.sector_count(); ++k) {
    const double v = std::norm(amplitudes[k]) / static_cast<double>(layout.sector_dim(k));
    for (std::size_t m = 0; m < layout.sector_dim(k); ++m) {
      const auto i = static_cast<Index>(layout.sa_index(k, k, m));
      rho(i, i) = v;
    }
  }
  return DensityMatrix(rho);
}

// Pure state on S (x) A (x) H whose reduction over the auxiliary system H is
// build_pure_mixed(p). H has basis |e_{lk}> (l < N1, k < N2) at index l*N2 + k;
//   <e_lk|alpha_i> = sqrt(q_k) delta_il,   <e_lk|beta_j> = sqrt(p_l) delta_jk.
inline CVector purify(const PureMixedParams& p) {
  if (p.sector_count() != 2) throw ValidationError("purification is defined for two sectors only");
  const auto& layout = p.layout();
  const auto& pw = p.weights(0);
  const auto& qw = p.weights(1);
  const std::size_t n1 = pw.size(), n2 = qw.size();
  const std::size_t aux = n1 * n2;
  CVector psi = CVector::Zero(static_cast<Index>(layout.sa_dim() * aux));
  auto at = [&](std::size_t sa, std::size_t h) -> Complex& {
    return psi(static_cast<Index>(sa * aux + h));
  };
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t k = 0; k < n2; ++k)
      at(layout.sa_index(0, 0, i), i * n2 + k) += p.amplitude(0) * std::sqrt(pw[i]) * std::sqrt(qw[k]);
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t l = 0; l < n1; ++l)
      at(layout.sa_index(1, 1, j), l * n2 + j) += p.amplitude(1) * std::sqrt(qw[j]) * std::sqrt(pw[l]);
  return psi;
}

// S-A indices of the rows that are not identically zero: (s_k, sector k).
inline std::vector<Index> support_indices(const SpaceLayout& layout) {
  std::vector<Index> idx;
  for (std::size_t k = 0; k < layout.sector_count(); ++k)
    for (std::size_t m = 0; m < layout.sector_dim(k); ++m)
      idx.push_back(static_cast<Index>(layout.sa_index(k, k, m)));
  return idx;
}

// rho with its identically-zero rows and columns deleted.
inline CMatrix collapsed_matrix(const PureMixedParams& p) {
  const CMatrix rho = detail::assemble(p, true);
  const auto idx = support_indices(p.layout());
  const auto n = static_cast<Index>(idx.size());
  CMatrix out(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) out(a, b) = rho(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  return out;
}

// Null vector of the two-sector collapsed matrix: first N1 entries c1 c2^*, the rest -|c1|^2.
inline CVector collapsed_kernel_vector(const PureMixedParams& p) {
  if (p.sector_count() != 2) throw ValidationError("kernel vector is defined for two sectors only");
  const std::size_t n1 = p.weights(0).size(), n2 = p.weights(1).size();
  CVector v(static_cast<Index>(n1 + n2));
  v.head(static_cast<Index>(n1)).setConstant(p.amplitude(0) * std::conj(p.amplitude(1)));
  v.tail(static_cast<Index>(n2)).setConstant(-p.probability(0));
  return v;
}

struct AnalyticSpectrum {
  std::size_t nonzero_count = 0;
  std::size_t zero_count = 0;
  // Full descending multiset (zeros included) when a closed form exists
  // (uniform weights); empty otherwise.
  std::vector<double> values;
  bool closed_form() const { return !values.empty(); }
};

inline AnalyticSpectrum analytic_spectrum(const PureMixedParams& p) {
  if (p.sector_count() != 2) throw ValidationError("closed-form spectrum is defined for two sectors only");
  const std::size_t n1 = p.weights(0).size(), n2 = p.weights(1).size();
  AnalyticSpectrum out;
  out.nonzero_count = n1 + n2 - 1;
  out.zero_count = p.layout().sa_dim() - out.nonzero_count;
  if (!p.all_uniform()) return out;
  const double a = p.probability(0);
  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
  out.values.assign(n1 - 1, a / d1);
  out.values.insert(out.values.end(), n2 - 1, (1.0 - a) / d2);
  out.values.push_back((d1 - a * (d1 - d2)) / (d1 * d2));
  out.values.insert(out.values.end(), out.zero_count, 0.0);
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

// Spectrum of the partial transpose with respect to S: |c_k|^2 w_k(m) for every
// sector microstate, +-|c_k||c_l| sqrt(sum w_k^2 sum w_l^2) for each pair k < l,
// and zeros elsewhere. Descending.
inline std::vector<double> analytic_pt_spectrum(const PureMixedParams& p) {
  std::vector<double> ev;
  const std::size_t K = p.sector_count();
  for (std::size_t k = 0; k < K; ++k)
    for (double w : p.weights(k)) ev.push_back(p.probability(k) * w);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = k + 1; l < K; ++l) {
      const double v = std::abs(p.amplitude(k)) * std::abs(p.amplitude(l)) *
                       std::sqrt(p.weights(k).sum_of_squares() * p.weights(l).sum_of_squares());
      ev.push_back(v);
      ev.push_back(-v);
    }
  ev.resize(p.layout().sa_dim(), 0.0);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

}  // namespace decohere::states
