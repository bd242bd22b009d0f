#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace decohere;
using namespace decohere::states;
using namespace testing_support;

namespace {

const double kHalf = std::sqrt(0.5);

PureMixedParams fig_params() {
  return PureMixedParams({Complex(kHalf), Complex(kHalf)}, {uniform_weights(7), uniform_weights(8)});
}

}  // namespace

TEST(WeightVector, RejectsInvalidEntries) {
  EXPECT_THROW(WeightVector({0.5, 0.6}), ValidationError);
  EXPECT_THROW(WeightVector({1.2, -0.2}), ValidationError);
  EXPECT_THROW(WeightVector(std::vector<double>{}), ValidationError);
  EXPECT_NO_THROW(WeightVector({0.25, 0.75}));
}

TEST(WeightVector, ProfilesAreNormalized) {
  for (std::size_t n : {1u, 3u, 8u}) {
    for (const auto& w : {uniform_weights(n), ramp_weights(n), geometric_weights(n, 0.3)}) {
      double s = 0.0;
      for (double x : w) s += x;
      EXPECT_NEAR(s, 1.0, 1e-14);
    }
  }
  const auto r = ramp_weights(3);
  EXPECT_NEAR(r[0], 0.5, 1e-15);
  EXPECT_NEAR(r[2], 1.0 / 6.0, 1e-15);
  EXPECT_TRUE(uniform_weights(5).is_uniform());
  EXPECT_FALSE(ramp_weights(5).is_uniform());
}

TEST(PureMixedParams, RejectsUnnormalizedAmplitudes) {
  EXPECT_THROW(PureMixedParams({Complex(0.8), Complex(0.8)}, {uniform_weights(2), uniform_weights(2)}),
               ValidationError);
  EXPECT_THROW(PureMixedParams({Complex(1.0)}, {uniform_weights(2)}), LayoutError);
}

TEST(BuildPureMixed, TwoByTwoMatchesHandExpansion) {
  // N1 = N2 = 1 collapses to the pure state c1|s1 a> + c2|s2 b>.
  const Complex c1(0.6, 0.0), c2(0.0, 0.8);
  const PureMixedParams p({c1, c2}, {uniform_weights(1), uniform_weights(1)});
  CVector psi = CVector::Zero(4);
  psi(0) = c1;  // |s1, a>
  psi(3) = c2;  // |s2, b>
  EXPECT_LT(max_abs(build_pure_mixed(p).matrix() - psi * psi.adjoint()), 1e-15);
}

TEST(BuildPureMixed, IsAValidStateWithExpectedRank) {
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_params(2, 10);
    const auto rho = build_pure_mixed(p);
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
    const RVector ev = qspace::eigvalsh(rho.matrix());
    EXPECT_GT(ev.minCoeff(), -1e-12);
    const auto n1 = p.weights(0).size(), n2 = p.weights(1).size();
    EXPECT_EQ(static_cast<std::size_t>((ev.array() > 1e-10).count()), n1 + n2 - 1);
  }
}

TEST(BuildPureMixed, UniformSpectrumMatchesClosedForm) {
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_params(2, 10, true);
    const double a = p.probability(0), b = p.probability(1);
    const auto n1 = static_cast<double>(p.weights(0).size()), n2 = static_cast<double>(p.weights(1).size());
    std::vector<double> expected(p.weights(0).size() - 1, a / n1);
    expected.insert(expected.end(), p.weights(1).size() - 1, b / n2);
    expected.push_back((n1 - a * (n1 - n2)) / (n1 * n2));
    expected.resize(p.layout().sa_dim(), 0.0);
    std::sort(expected.begin(), expected.end(), std::greater<>());
    const auto got = sorted_desc(qspace::eigvalsh(build_pure_mixed(p).matrix()));
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-12);

    const auto an = analytic_spectrum(p);
    ASSERT_TRUE(an.closed_form());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(an.values[i], expected[i], 1e-15);
  }
}

TEST(AnalyticSpectrum, NonUniformReportsCountsOnly) {
  const PureMixedParams p({Complex(kHalf), Complex(kHalf)}, {ramp_weights(3), uniform_weights(4)});
  const auto an = analytic_spectrum(p);
  EXPECT_FALSE(an.closed_form());
  EXPECT_EQ(an.nonzero_count, 6u);
  EXPECT_EQ(an.zero_count, 14u - 6u);
}

TEST(NearestSeparable, IsTheSystemBlockDiagonalPart) {
  const auto p = random_params(2, 6);
  const CMatrix rho = build_pure_mixed(p).matrix();
  const CMatrix star = build_nearest_separable(p).matrix();
  const auto na = static_cast<Index>(p.layout().apparatus_dim());
  EXPECT_LT(max_abs(star.block(0, 0, na, na) - rho.block(0, 0, na, na)), 1e-16);
  EXPECT_LT(max_abs(star.block(na, na, na, na) - rho.block(na, na, na, na)), 1e-16);
  EXPECT_EQ(max_abs(star.block(0, na, na, na)), 0.0);
}

TEST(EquimixedClassical, EntropyMatchesFormula) {
  const auto p = fig_params();
  const auto rho0 = build_equimixed_classical(p.layout(), p.amplitudes());
  double s = 0.0;
  for (double x : sorted_desc(qspace::eigvalsh(rho0.matrix())))
    if (x > 0) s -= x * std::log(x);
  const double expected = -0.5 * std::log(0.5 / 7.0) - 0.5 * std::log(0.5 / 8.0);
  EXPECT_NEAR(s, expected, 1e-12);
  EXPECT_NEAR(s, 2.705823, 1e-6);
}

TEST(EquimixedClassical, RequiresNormalizedAmplitudes) {
  const SpaceLayout l(2, {2, 3});
  EXPECT_THROW(build_equimixed_classical(l, {Complex(1.0), Complex(1.0)}), ValidationError);
  EXPECT_THROW(build_equimixed_classical(l, {Complex(1.0)}), ValidationError);
}

TEST(Purify, ReducesToRhoAndIsNormalized) {
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(2, 6);
    const CVector psi = purify(p);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    const std::size_t aux = p.weights(0).size() * p.weights(1).size();
    const std::size_t dims[2] = {p.layout().sa_dim(), aux};
    const bool keep[2] = {true, false};
    const CMatrix red = qspace::partial_trace(CMatrix(psi * psi.adjoint()), dims, keep);
    EXPECT_LT(max_abs(red - build_pure_mixed(p).matrix()), 1e-12);
  }
}

TEST(Purify, RejectsThreeSectors) {
  EXPECT_THROW(purify(random_params(3, 3)), ValidationError);
}

TEST(CollapsedMatrix, KernelVectorIsAnnihilated) {
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(2, 9);
    const CMatrix m = collapsed_matrix(p);
    const auto n = p.weights(0).size() + p.weights(1).size();
    ASSERT_EQ(static_cast<std::size_t>(m.rows()), n);
    const CVector v = collapsed_kernel_vector(p);
    EXPECT_LT((m * v).norm(), 1e-12 * v.norm());
  }
}

TEST(CollapsedMatrix, HasTheSameNonzeroSpectrum) {
  const auto p = random_params(2, 7);
  const auto full = sorted_desc(qspace::eigvalsh(build_pure_mixed(p).matrix()));
  const auto col = sorted_desc(qspace::eigvalsh(collapsed_matrix(p)));
  for (std::size_t i = 0; i < col.size(); ++i) EXPECT_NEAR(full[i], col[i], 1e-12);
}

TEST(PartialTransposeSpectrum, TwoSectorsHaveOneNegativeEigenvalue) {
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_params(2, 10);
    const auto rho = build_pure_mixed(p);
    const auto ev = sorted_desc(qspace::eigvalsh(qspace::partial_transpose(rho, p.layout())));
    double sp = 0.0, sq = 0.0;
    for (double w : p.weights(0)) sp += w * w;
    for (double w : p.weights(1)) sq += w * w;
    const double expected = -std::abs(p.amplitude(0)) * std::abs(p.amplitude(1)) * std::sqrt(sp * sq);
    EXPECT_NEAR(ev.back(), expected, 1e-12);
    EXPECT_GT(ev[ev.size() - 2], -1e-12);
    const auto an = analytic_pt_spectrum(p);
    for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], an[i], 1e-12);
  }
}

TEST(PartialTransposeSpectrum, ThreeSectorsHaveThreeNegativeEigenvalues) {
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(3, 5);
    const auto rho = build_pure_mixed(p);
    const auto ev = sorted_desc(qspace::eigvalsh(qspace::partial_transpose(rho, p.layout())));
    std::vector<double> neg;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t l = k + 1; l < 3; ++l)
        neg.push_back(-std::abs(p.amplitude(k) * p.amplitude(l)) *
                      std::sqrt(p.weights(k).sum_of_squares() * p.weights(l).sum_of_squares()));
    std::sort(neg.begin(), neg.end(), std::greater<>());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ev[ev.size() - 3 + i], neg[i], 1e-12);
    EXPECT_GT(ev[ev.size() - 4], -1e-12);
  }
}
