#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace decohere;
using namespace decohere::measures;
using namespace testing_support;
using qspace::DensityMatrix;
using qspace::SpaceLayout;

namespace {

const double kHalf = std::sqrt(0.5);

DensityMatrix pure(const CVector& v) { return DensityMatrix(CMatrix(v * v.adjoint())); }

// df/dx at 0 for f(x) = s(rho | (1-x) rho* + x sigma) by first-order perturbation of
// ln: 1 - sum_jk rho_kj sigma_jk L(l_j, l_k) in the eigenbasis of rho*, with L the
// divided difference of ln.
double derivative_oracle(const states::PureMixedParams& p, const CMatrix& sigma) {
  const auto sp = qspace::eigh(states::build_nearest_separable(p).matrix());
  const CMatrix rho = sp.vectors.adjoint() * states::build_pure_mixed(p).matrix() * sp.vectors;
  const CMatrix sig = sp.vectors.adjoint() * sigma * sp.vectors;
  double acc = 0.0;
  for (Index j = 0; j < rho.rows(); ++j)
    for (Index k = 0; k < rho.rows(); ++k) {
      const double lj = sp.values(j), lk = sp.values(k);
      if (std::abs(rho(k, j)) < 1e-300) continue;
      const double L = std::abs(lj - lk) < 1e-13 * std::max(lj, lk)
                           ? 1.0 / lj
                           : (std::log(lj) - std::log(lk)) / (lj - lk);
      acc += (rho(k, j) * sig(j, k)).real() * L;
    }
  return 1.0 - acc;
}

}  // namespace

TEST(Entropy, PureIsZeroAndMaximallyMixedIsLogD) {
  EXPECT_NEAR(vn_entropy(pure(random_complex(5, 1).col(0).normalized())), 0.0, 1e-12);
  for (Index d : {2, 5, 9})
    EXPECT_NEAR(vn_entropy(DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d))),
                std::log(static_cast<double>(d)), 1e-12);
}

TEST(RelativeEntropy, VanishesOnItselfAndIsNonNegative) {
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix a(random_density(6)), b(random_density(6));
    EXPECT_NEAR(relative_entropy(a, a), 0.0, 1e-10);
    EXPECT_GT(relative_entropy(a, b), 0.0);
  }
}

TEST(RelativeEntropy, DiagonalCaseIsKullbackLeibler) {
  CMatrix p = CMatrix::Zero(3, 3), q = CMatrix::Zero(3, 3);
  const double pv[3] = {0.5, 0.3, 0.2}, qv[3] = {0.2, 0.2, 0.6};
  double kl = 0.0;
  for (int i = 0; i < 3; ++i) {
    p(i, i) = pv[i];
    q(i, i) = qv[i];
    kl += pv[i] * std::log(pv[i] / qv[i]);
  }
  EXPECT_NEAR(relative_entropy(DensityMatrix(p), DensityMatrix(q)), kl, 1e-13);
}

TEST(RelativeEntropy, UnsupportedStateHitsTheFloor) {
  CMatrix p = CMatrix::Zero(2, 2), q = CMatrix::Zero(2, 2);
  p(0, 0) = p(1, 1) = 0.5;
  q(0, 0) = 1.0;
  const double s = relative_entropy(DensityMatrix(p), DensityMatrix(q), 1e-12);
  EXPECT_NEAR(s, -std::log(2.0) - 0.5 * std::log(1e-12), 1e-9);
  EXPECT_THROW(relative_entropy(DensityMatrix(p), DensityMatrix(q), 0.0), ValidationError);
}

TEST(RelativeEntropy, RejectsDimensionMismatch) {
  EXPECT_THROW(relative_entropy(DensityMatrix(random_density(2)), DensityMatrix(random_density(3))), LayoutError);
}

TEST(CorrelationSplit, SolvableCaseMatchesClosedForms) {
  for (std::size_t n1 : {1u, 2u, 4u, 7u})
    for (std::size_t n2 : {1u, 3u, 8u}) {
      for (double a : {0.5, 0.2}) {
        const states::PureMixedParams p({Complex(std::sqrt(a)), Complex(std::sqrt(1 - a))},
                                        {states::uniform_weights(n1), states::uniform_weights(n2)});
        const auto split = correlation_split(states::build_pure_mixed(p), p.layout());
        const double b = 1 - a, d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
        const double q = (a / d1) * std::log(1 + b * d1 / (a * d2)) + (b / d2) * std::log(1 + a * d2 / (b * d1));
        EXPECT_NEAR(split.quantum, q, 1e-10) << n1 << "," << n2 << "," << a;
        EXPECT_NEAR(split.classical, -a * std::log(a) - b * std::log(b), 1e-10);
      }
    }
}

TEST(CorrelationSplit, PurePureLimitIsLnTwo) {
  const states::PureMixedParams p({Complex(kHalf), Complex(kHalf)},
                                  {states::uniform_weights(1), states::uniform_weights(1)});
  const auto split = correlation_split(states::build_pure_mixed(p), p.layout());
  EXPECT_NEAR(split.quantum, std::log(2.0), 1e-10);
  EXPECT_NEAR(split.total, 2 * std::log(2.0), 1e-10);
}

TEST(CorrelationSplit, TotalIsQuantumPlusClassical) {
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(2, 6);
    const auto split = correlation_split(states::build_pure_mixed(p), p.layout());
    EXPECT_NEAR(split.total, split.quantum + split.classical, 1e-9);
    EXPECT_GT(split.quantum, 0.0);
  }
}

TEST(Fidelity, BasicIdentities) {
  const DensityMatrix a(random_density(5)), b(random_density(5));
  EXPECT_NEAR(fidelity(a, a), 1.0, 1e-10);
  EXPECT_NEAR(bures_distance(a, a), 0.0, 1e-9);
  EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-10);
  const double f = fidelity(a, b);
  EXPECT_GE(f, 0.0);
  EXPECT_LE(f, 1.0);
}

TEST(Fidelity, PureStatesGiveSquaredOverlap) {
  const CVector u = random_complex(4, 1).col(0).normalized();
  const CVector v = random_complex(4, 1).col(0).normalized();
  EXPECT_NEAR(fidelity(pure(u), pure(v)), std::norm(u.dot(v)), 1e-10);
  CVector e0 = CVector::Zero(4), e1 = CVector::Zero(4);
  e0(0) = 1.0;
  e1(1) = 1.0;
  EXPECT_NEAR(fidelity(pure(e0), pure(e1)), 0.0, 1e-14);
  EXPECT_NEAR(bures_distance(pure(e0), pure(e1)), 2.0, 1e-7);
}

TEST(QDecoherence, MatchesCoherenceNorm) {
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(2, 8);
    const double expected =
        p.probability(0) * p.probability(1) * p.weights(0).sum_of_squares() * p.weights(1).sum_of_squares();
    EXPECT_NEAR(q_decoherence(states::build_pure_mixed(p), p.layout()), expected, 1e-14);
    EXPECT_EQ(q_decoherence(states::build_nearest_separable(p), p.layout()), 0.0);
  }
}

TEST(QRelaxation, VanishesOnTargets) {
  const states::PureMixedParams p({Complex(0.6), Complex(0.8)},
                                  {states::uniform_weights(3), states::uniform_weights(4)});
  const auto rho0 = states::build_equimixed_classical(p.layout(), p.amplitudes());
  EXPECT_NEAR(q_relaxation_weighted(rho0, p.layout(), p.amplitudes()), 0.0, 1e-15);
  // Unweighted targets 1/N_k: deviation (0.36-1)/3 per a-level, (0.64-1)/4 per b-level.
  const double expected = 3 * std::pow((1 - 0.36) / 3, 2) + 4 * std::pow((1 - 0.64) / 4, 2);
  EXPECT_NEAR(q_relaxation(rho0, p.layout()), expected, 1e-15);
}

TEST(QIndices, RejectWrongLayouts) {
  const auto p = random_params(2, 4);
  const auto rho = states::build_pure_mixed(p);
  EXPECT_THROW(q_decoherence(rho, p.layout().with_environment(3)), LayoutError);
  EXPECT_THROW(q_decoherence(rho, SpaceLayout(2, {9, 9})), LayoutError);
  const auto p3 = random_params(3, 3);
  EXPECT_THROW(q_decoherence(states::build_pure_mixed(p3), p3.layout()), LayoutError);
}

TEST(MinPtEigenvalue, MatchesClosedFormAndCount) {
  const states::PureMixedParams p({Complex(kHalf), Complex(kHalf)},
                                  {states::uniform_weights(7), states::uniform_weights(8)});
  const auto pt = min_pt_eigenvalue(states::build_pure_mixed(p), p.layout());
  EXPECT_NEAR(pt.value, -0.5 / std::sqrt(56.0), 1e-12);
  EXPECT_NEAR(pt.value, -0.0668153, 1e-7);
  EXPECT_EQ(pt.negative_count, 1u);
  EXPECT_EQ(min_pt_eigenvalue(states::build_nearest_separable(p), p.layout()).negative_count, 0u);
}

TEST(ProductState, DensityIsKroneckerProduct) {
  const ProductState s{random_complex(2, 1).col(0).normalized(), random_complex(3, 1).col(0).normalized()};
  const CMatrix d = s.density();
  EXPECT_NEAR(d.trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(d(1, 4).real(), (s.system(0) * std::conj(s.system(1)) * s.apparatus(1) * std::conj(s.apparatus(1))).real(),
              1e-14);
}

TEST(NearestSeparableDerivative, AgreesWithPerturbationOracle) {
  std::mt19937_64 eng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = harness::random_params(eng, 2, 5, trial % 3 == 0, trial % 2 == 0);
    for (int j = 0; j < 5; ++j) {
      const ProductState s{dynamics::haar_state(2, eng), dynamics::haar_state(p.layout().apparatus_dim(), eng)};
      // Richardson removes the O(h) bias; leakage into the null space of rho* leaves an
      // h ln h term, hence the small step.
      const double h = 1e-7;
      const double fd = 2.0 * nearest_separable_derivative(p, s, h / 2) - nearest_separable_derivative(p, s, h);
      const double oracle = derivative_oracle(p, s.density());
      EXPECT_NEAR(fd, oracle, 1e-5 * std::max(1.0, std::abs(oracle)));
      EXPECT_GE(nearest_separable_derivative(p, s), -1e-6);
    }
  }
}

TEST(NearestSeparableDerivative, ValidatesInputs) {
  const auto p = random_params(2, 3);
  const auto na = static_cast<Index>(p.layout().apparatus_dim());
  const ProductState good{CVector::Unit(2, 0), CVector::Unit(na, 0)};
  EXPECT_THROW(nearest_separable_derivative(p, {CVector::Unit(3, 0), CVector::Unit(na, 0)}), LayoutError);
  EXPECT_THROW(nearest_separable_derivative(p, {2.0 * CVector::Unit(2, 0), CVector::Unit(na, 0)}), ValidationError);
  EXPECT_THROW(nearest_separable_derivative(p, good, 0.0), ValidationError);
  EXPECT_THROW(nearest_separable_derivative(p, good, 0.1), ValidationError);
}
