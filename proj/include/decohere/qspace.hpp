#pragma once

// Composite-space bookkeeping and Hermitian linear algebra on S (system),
// A (apparatus) and E (environment).
//
// Basis ordering is fixed: system index major, then the apparatus index with
// pointer sectors concatenated in order, then the environment index. For a
// two-level system with sectors [N1, N2] the S-A basis reads
//   |s1,a_1..a_N1>, |s1,b_1..b_N2>, |s2,a_1..a_N1>, |s2,b_1..b_N2>.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "decohere/core.hpp"

namespace decohere::qspace {

enum class Part : unsigned { System = 1u, Apparatus = 2u, Environment = 4u };

constexpr Part operator|(Part a, Part b) {
  return static_cast<Part>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr bool contains(Part set, Part p) {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(p)) != 0;
}

class SpaceLayout {
 public:
  SpaceLayout(std::size_t system_dim, std::vector<std::size_t> sector_dims, std::size_t env_dim = 1)
      : system_dim_(system_dim), sector_dims_(std::move(sector_dims)), env_dim_(env_dim) {
    if (system_dim_ < 2) throw LayoutError("system dimension must be at least 2");
    if (sector_dims_.size() != system_dim_)
      throw LayoutError("need exactly one pointer sector per system state (got " +
                        std::to_string(sector_dims_.size()) + " sectors for d_s=" +
                        std::to_string(system_dim_) + ")");
    for (auto n : sector_dims_)
      if (n == 0) throw LayoutError("sector dimensions must be positive");
    if (env_dim_ == 0) throw LayoutError("environment dimension must be positive");
  }

  std::size_t system_dim() const { return system_dim_; }
  std::size_t env_dim() const { return env_dim_; }
  std::size_t sector_count() const { return sector_dims_.size(); }
  const std::vector<std::size_t>& sector_dims() const { return sector_dims_; }
  std::size_t sector_dim(std::size_t k) const { return sector_dims_.at(k); }

  std::size_t apparatus_dim() const {
    return std::accumulate(sector_dims_.begin(), sector_dims_.end(), std::size_t{0});
  }
  std::size_t sa_dim() const { return system_dim_ * apparatus_dim(); }
  std::size_t total_dim() const { return sa_dim() * env_dim_; }

  // Offset of sector k inside the apparatus index.
  std::size_t sector_offset(std::size_t k) const {
    if (k >= sector_dims_.size()) throw LayoutError("sector index out of range");
    return std::accumulate(sector_dims_.begin(), sector_dims_.begin() + static_cast<long>(k),
                           std::size_t{0});
  }

  // S-A index of |s, a> with a an apparatus index.
  std::size_t sa_index(std::size_t s, std::size_t a) const { return s * apparatus_dim() + a; }

  // S-A index of |s, (sector k, microstate m)>.
  std::size_t sa_index(std::size_t s, std::size_t k, std::size_t m) const {
    return sa_index(s, sector_offset(k) + m);
  }

  SpaceLayout without_environment() const { return {system_dim_, sector_dims_, 1}; }
  SpaceLayout with_environment(std::size_t n_e) const { return {system_dim_, sector_dims_, n_e}; }

  std::vector<std::size_t> factor_dims() const { return {system_dim_, apparatus_dim(), env_dim_}; }

  bool operator==(const SpaceLayout&) const = default;

 private:
  std::size_t system_dim_;
  std::vector<std::size_t> sector_dims_;
  std::size_t env_dim_;
};

inline double max_asymmetry(const CMatrix& m) {
  if (m.rows() != m.cols()) throw LayoutError("matrix is not square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Returns (m + m^dagger)/2, refusing inputs whose asymmetry exceeds `tol`.
inline CMatrix hermitize(const CMatrix& m, double tol = 1e-10) {
  if (m.size() == 0) return m;
  const double asym = max_asymmetry(m);
  if (asym > tol)
    throw ValidationError("matrix is not Hermitian (max |M - M^dagger| = " + std::to_string(asym) +
                          ")");
  return (m + m.adjoint()) * 0.5;
}

struct HermitianSpectrum {
  RVector values;    // descending
  CMatrix vectors;   // columns, unitary

  CMatrix reconstruct() const {
    return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
  }
};

struct RealSymmetricSpectrum {
  RVector values;    // descending
  RMatrix vectors;   // columns, orthogonal
};

namespace detail {

inline void reverse_columns(RVector& values, auto& vectors) {
  const Index n = values.size();
  for (Index i = 0; i < n / 2; ++i) {
    std::swap(values(i), values(n - 1 - i));
    vectors.col(i).swap(vectors.col(n - 1 - i));
  }
}

}  // namespace detail

// Full eigendecomposition of a Hermitian matrix (LAPACK zheevd).
inline HermitianSpectrum eigh(const CMatrix& m, double herm_tol = 1e-10) {
  HermitianSpectrum out;
  out.vectors = hermitize(m, herm_tol);
  const auto n = static_cast<lapack_int>(out.vectors.rows());
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                                         out.values.data());
  if (info != 0) throw InvariantError("zheevd failed with info=" + std::to_string(info));
  detail::reverse_columns(out.values, out.vectors);
  return out;
}

// Eigenvalues only, descending.
inline RVector eigvalsh(const CMatrix& m, double herm_tol = 1e-10) {
  CMatrix a = hermitize(m, herm_tol);
  const auto n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) throw InvariantError("zheevd failed with info=" + std::to_string(info));
  return w.reverse().eval();
}

// Real symmetric eigendecomposition (LAPACK dsyevd); about four times cheaper
// than the complex route for the large real Hamiltonians used in dynamics.
inline RealSymmetricSpectrum eigh_real(const RMatrix& m, double sym_tol = 1e-10) {
  if (m.rows() != m.cols()) throw LayoutError("matrix is not square");
  RealSymmetricSpectrum out;
  if (m.size() > 0) {
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol) throw ValidationError("matrix is not symmetric");
  }
  out.vectors = (m + m.transpose()) * 0.5;
  const auto n = static_cast<lapack_int>(m.rows());
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                                         out.values.data());
  if (info != 0) throw InvariantError("dsyevd failed with info=" + std::to_string(info));
  detail::reverse_columns(out.values, out.vectors);
  return out;
}

struct Tolerance {
  double hermiticity = 1e-10;  // larger asymmetry is an error, smaller is symmetrized away
  double trace = 1e-12;
  double positivity = 1e-10;
};

// Hermitian, unit-trace, positive semidefinite matrix. Construction validates.
class DensityMatrix {
 public:
  explicit DensityMatrix(const CMatrix& m, const Tolerance& tol = {}) : m_(hermitize(m, tol.hermiticity)) {
    if (m_.rows() == 0) throw ValidationError("empty density matrix");
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > tol.trace)
      throw ValidationError("density matrix trace " + std::to_string(tr) + " differs from 1");
    const double min_eig = eigvalsh(m_).minCoeff();
    if (min_eig < -tol.positivity)
      throw ValidationError("density matrix has negative eigenvalue " + std::to_string(min_eig));
  }

  const CMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

template <class A, class B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename Eigen::ScalarBinaryOpTraits<typename A::Scalar, typename B::Scalar>::ReturnType;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

struct IndexSplit {
  std::size_t kept_dim = 1;
  std::size_t traced_dim = 1;
  std::vector<std::size_t> kept;    // full index -> kept multi-index (flattened)
  std::vector<std::size_t> traced;  // full index -> traced multi-index (flattened)
};

inline IndexSplit split_indices(std::span<const std::size_t> dims, std::span<const bool> keep) {
  if (dims.size() != keep.size()) throw LayoutError("keep mask length differs from factor count");
  IndexSplit s;
  std::size_t total = 1;
  for (std::size_t f = 0; f < dims.size(); ++f) {
    if (dims[f] == 0) throw LayoutError("zero-dimensional factor");
    total *= dims[f];
    (keep[f] ? s.kept_dim : s.traced_dim) *= dims[f];
  }
  s.kept.resize(total);
  s.traced.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i, k = 0, t = 0, kstride = 1, tstride = 1;
    for (std::size_t f = dims.size(); f-- > 0;) {
      const std::size_t digit = rem % dims[f];
      rem /= dims[f];
      if (keep[f]) {
        k += digit * kstride;
        kstride *= dims[f];
      } else {
        t += digit * tstride;
        tstride *= dims[f];
      }
    }
    s.kept[i] = k;
    s.traced[i] = t;
  }
  return s;
}

}  // namespace detail

// Partial trace over every factor whose `keep` flag is false.
inline CMatrix partial_trace(const CMatrix& m, std::span<const std::size_t> dims,
                             std::span<const bool> keep) {
  const auto split = detail::split_indices(dims, keep);
  const auto total = static_cast<Index>(split.kept.size());
  if (m.rows() != total || m.cols() != total)
    throw LayoutError("matrix dimension " + std::to_string(m.rows()) +
                      " inconsistent with factor dimensions (" + std::to_string(total) + ")");
  // Group full indices by traced multi-index; within a group they are ordered by kept index.
  std::vector<std::vector<Index>> groups(split.traced_dim);
  for (Index i = 0; i < total; ++i) groups[split.traced[static_cast<std::size_t>(i)]].push_back(i);
  const auto kd = static_cast<Index>(split.kept_dim);
  CMatrix out = CMatrix::Zero(kd, kd);
  for (const auto& g : groups)
    for (Index a = 0; a < kd; ++a)
      for (Index b = 0; b < kd; ++b) out(a, b) += m(g[static_cast<std::size_t>(a)], g[static_cast<std::size_t>(b)]);
  return out;
}

// Reduced state of the pure states stored as columns of `states` (each column
// already scaled by the square root of its ensemble weight): sum_c Tr_traced |c><c|.
inline CMatrix reduce_columns(const CMatrix& states, std::span<const std::size_t> dims,
                              std::span<const bool> keep) {
  const auto split = detail::split_indices(dims, keep);
  if (states.rows() != static_cast<Index>(split.kept.size()))
    throw LayoutError("state length inconsistent with factor dimensions");
  const auto kd = static_cast<Index>(split.kept_dim);
  const auto td = static_cast<Index>(split.traced_dim);
  // Stack every column reshaped as (traced x kept); rho = (M^dagger M)^T.
  CMatrix stacked(td * states.cols(), kd);
  for (Index c = 0; c < states.cols(); ++c)
    for (Index i = 0; i < states.rows(); ++i)
      stacked(c * td + static_cast<Index>(split.traced[static_cast<std::size_t>(i)]),
              static_cast<Index>(split.kept[static_cast<std::size_t>(i)])) = states(i, c);
  CMatrix gram = stacked.adjoint() * stacked;
  return gram.transpose();
}

// Fast path when the traced factor is the trailing one (S-A kept, E traced).
inline CMatrix reduce_trailing(const CMatrix& states, std::size_t kept_dim, std::size_t traced_dim) {
  const auto kd = static_cast<Index>(kept_dim);
  const auto td = static_cast<Index>(traced_dim);
  if (states.rows() != kd * td) throw LayoutError("state length inconsistent with kept x traced");
  CMatrix out = CMatrix::Zero(kd, kd);
  for (Index c = 0; c < states.cols(); ++c) {
    // Column-major map (traced x kept): element (e, k) = state[k * td + e].
    Eigen::Map<const CMatrix> m(states.col(c).data(), td, kd);
    out.noalias() += m.adjoint() * m;
  }
  return out.transpose();
}

inline std::vector<bool> keep_mask(Part keep) {
  return {contains(keep, Part::System), contains(keep, Part::Apparatus),
          contains(keep, Part::Environment)};
}

// Partial trace on the S (x) A (x) E layout, keeping the parts in `keep`.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const SpaceLayout& layout, Part keep,
                                   const Tolerance& tol = {}) {
  if (static_cast<std::size_t>(rho.dim()) != layout.total_dim())
    throw LayoutError("density matrix dimension " + std::to_string(rho.dim()) +
                      " does not match layout dimension " + std::to_string(layout.total_dim()));
  const auto dims = layout.factor_dims();
  const auto mask = keep_mask(keep);
  const bool flags[3] = {mask[0], mask[1], mask[2]};
  return DensityMatrix(partial_trace(rho.matrix(), dims, flags), tol);
}

// Transpose of the first factor of a d1 (x) d2 operator.
inline CMatrix partial_transpose(const CMatrix& m, std::size_t d1, std::size_t d2) {
  const auto n1 = static_cast<Index>(d1), n2 = static_cast<Index>(d2);
  if (m.rows() != n1 * n2 || m.cols() != n1 * n2)
    throw LayoutError("matrix dimension inconsistent with the two-factor split");
  CMatrix out(m.rows(), m.cols());
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n1; ++j) out.block(i * n2, j * n2, n2, n2) = m.block(j * n2, i * n2, n2, n2);
  return out;
}

// Partial transpose with respect to S of an S-A state.
inline CMatrix partial_transpose(const DensityMatrix& rho, const SpaceLayout& layout) {
  if (layout.env_dim() != 1)
    throw LayoutError("partial transpose needs an S-A state (trace out the environment first)");
  if (static_cast<std::size_t>(rho.dim()) != layout.sa_dim())
    throw LayoutError("density matrix dimension does not match S-A layout");
  return partial_transpose(rho.matrix(), layout.system_dim(), layout.apparatus_dim());
}

// V f(max(lambda, floor)) V^dagger in the eigenbasis of m.
template <class F>
CMatrix hermitian_fn(const CMatrix& m, F&& f, double floor = -std::numeric_limits<double>::infinity()) {
  const HermitianSpectrum sp = eigh(m);
  RVector fv(sp.values.size());
  for (Index i = 0; i < fv.size(); ++i) fv(i) = f(std::max(sp.values(i), floor));
  return sp.vectors * fv.cast<Complex>().asDiagonal() * sp.vectors.adjoint();
}

// Matrix logarithm with eigenvalues clipped below at `floor` (> 0).
inline CMatrix hermitian_log(const CMatrix& m, double floor = kDefaultFloor) {
  if (!(floor > 0.0)) throw ValidationError("logarithm floor must be positive");
  return hermitian_fn(m, [](double x) { return std::log(x); }, floor);
}

// Matrix square root; negative round-off eigenvalues are clipped to zero.
inline CMatrix hermitian_sqrt(const CMatrix& m) {
  return hermitian_fn(m, [](double x) { return std::sqrt(x); }, 0.0);
}

}  // namespace decohere::qspace
