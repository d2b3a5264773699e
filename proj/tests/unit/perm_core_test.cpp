#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "permlab/errors.hpp"
#include "permlab/perm_core.hpp"

using namespace permlab;

namespace {

using Images = std::vector<Element>;

// Reference helpers: plain arrays, no library code.
Images apply_tp(Images p, Element a, Element b) {
  for (auto& v : p) {
    if (v == a)
      v = b;
    else if (v == b)
      v = a;
  }
  return p;
}

// <N t_N> ... <1 t_1>: the factor for k = 0 acts first.
Images product_of(const std::vector<Element>& t, std::size_t from, std::size_t to) {
  Images p(t.size());
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t k = from; k < to; ++k) p = apply_tp(p, static_cast<Element>(k), t[k]);
  return p;
}

std::vector<Element> tuple_of(std::size_t n, std::uint64_t index) {
  std::vector<Element> t(n, 0);
  for (std::size_t k = 1; k < n; ++k) {
    t[k] = static_cast<Element>(index % (k + 1));
    index /= k + 1;
  }
  return t;
}

std::size_t count_cycles(const Images& p) {
  std::vector<bool> seen(p.size(), false);
  std::size_t cycles = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (std::size_t j = i; !seen[j]; j = p[j]) seen[j] = true;
  }
  return cycles;
}

Images images_of(const Permutation& p) { return {p.images().begin(), p.images().end()}; }

std::vector<Element> values_of(const MonotoneFactorization& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

TEST(Permutation, ParseAndPrintAreOneBased) {
  const Permutation p = Permutation::parse("2 3 1");
  EXPECT_EQ(images_of(p), (Images{1, 2, 0}));
  EXPECT_EQ(p.str(), "2 3 1");
  EXPECT_THROW(Permutation::parse("2 1 1"), std::invalid_argument);
  EXPECT_THROW(Permutation::parse("0 1"), std::invalid_argument);
  EXPECT_THROW(Permutation::parse("a b"), std::invalid_argument);
}

TEST(Permutation, CompositionAppliesRightFactorFirst) {
  const Permutation a = Permutation::parse("2 1 3");
  const Permutation b = Permutation::parse("1 3 2");
  // (a*b)(1) = a(b(1)) = a(1) = 2; (a*b)(2) = a(3) = 3; (a*b)(3) = a(2) = 1
  EXPECT_EQ(images_of(a * b), (Images{1, 2, 0}));
}

TEST(MonotoneFactorize, HandFixtures) {
  EXPECT_EQ(monotone_factorize(Permutation::parse("2 3 1")).str(), "t: 1 1 1");
  EXPECT_EQ(monotone_factorize(Permutation::parse("1 3 2")).str(), "t: 1 2 2");
  EXPECT_EQ(monotone_factorize(Permutation::identity(4)).str(), "t: 1 2 3 4");
  // <3 1><2 1><1 1>: 1 -> 2 -> 2, 2 -> 1 -> 3, 3 -> 3 -> 1
  EXPECT_EQ(images_of(compose_from_factors(MonotoneFactorization::parse("t: 1 1 1"))), (Images{1, 2, 0}));
}

TEST(MonotoneFactorize, MatchesReferenceProductExhaustively) {
  for (std::size_t n = 1; n <= 6; ++n) {
    std::set<Images> hit;
    for (std::uint64_t i = 0; i < factorial(n); ++i) {
      const auto t = tuple_of(n, i);
      const Images expected = product_of(t, 0, n);
      const auto f = MonotoneFactorization(t);
      ASSERT_EQ(f.index(), i);
      ASSERT_EQ(images_of(compose_from_factors(f)), expected);
      ASSERT_EQ(values_of(monotone_factorize(Permutation(expected))), t);
      hit.insert(expected);
    }
    EXPECT_EQ(hit.size(), factorial(n)) << "n=" << n;
  }
}

TEST(MonotoneFactorize, RejectsInvalidTuples) {
  EXPECT_THROW(MonotoneFactorization(std::vector<Element>{0, 2}), std::invalid_argument);
  EXPECT_THROW(MonotoneFactorization::parse("t: 1 3"), std::invalid_argument);
}

TEST(Invert, ReversedFactorProductIsTheInverse) {
  EXPECT_EQ(images_of(invert(Permutation::parse("2 3 1"))), (Images{2, 0, 1}));
  const std::size_t n = 5;
  for (std::uint64_t i = 0; i < factorial(n); ++i) {
    const auto f = MonotoneFactorization::from_index(n, i);
    const Images p = images_of(compose_from_factors(f));
    Images inv(n);
    for (std::size_t x = 0; x < n; ++x) inv[p[x]] = static_cast<Element>(x);
    ASSERT_EQ(images_of(invert_via_factors(f)), inv);
    ASSERT_EQ(images_of(invert(Permutation(p))), inv);
  }
}

TEST(PartialProduct, RecomposesExhaustively) {
  const std::size_t n = 5;
  for (std::uint64_t i = 0; i < factorial(n); ++i) {
    const auto f = MonotoneFactorization::from_index(n, i);
    const auto t = values_of(f);
    const Permutation p = compose_from_factors(f);
    for (std::size_t k = 0; k < n; ++k) {
      const Permutation above = partial_product(f, k, Side::above);
      const Permutation below = partial_product(f, k, Side::below);
      ASSERT_EQ(images_of(below), product_of(t, 0, k));
      ASSERT_EQ(above * Permutation::transposition(n, static_cast<Element>(k), t[k]) * below, p);
    }
    ASSERT_TRUE(partial_product(f, n - 1, Side::above).is_identity());
  }
}

TEST(SampleUniform, ChiSquareAtFourWithinFourSigma) {
  std::mt19937_64 rng(20240601);
  const std::size_t draws = 1000000;
  std::vector<std::size_t> counts(24, 0);
  for (std::size_t i = 0; i < draws; ++i) ++counts[monotone_factorize(sample_uniform(4, rng)).index()];
  const double expected = static_cast<double>(draws) / 24.0;
  double chi2 = 0.0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // chi-square with 23 degrees of freedom: mean 23, variance 46
  EXPECT_LT(chi2, 23.0 + 4.0 * std::sqrt(46.0));
}

TEST(SampleUniform, SeededReplayAndTrivialDegree) {
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_uniform(6, a), sample_uniform(6, b));
  std::mt19937_64 r(1);
  EXPECT_TRUE(sample_uniform(1, r).is_identity());
}

TEST(ActiveSets, HandFixture) {
  const Permutation p = Permutation::parse("1 3 2");
  EXPECT_EQ(active_set(p, 1).members, (std::vector<Element>{1, 2}));
  EXPECT_EQ(apply_via_active(monotone_factorize(p), 1, ActiveKind::forward), 2u);
  for (Element x = 0; x < 4; ++x) EXPECT_EQ(active_set(Permutation::identity(4), x).members, std::vector<Element>{x});
}

TEST(ActiveSets, MatchTheDefinitionExhaustively) {
  const std::size_t n = 6;
  for (std::uint64_t i = 0; i < factorial(n); ++i) {
    const auto f = MonotoneFactorization::from_index(n, i);
    const auto t = values_of(f);
    for (Element x = 0; x < n; ++x) {
      std::vector<Element> fwd, inv;
      for (std::size_t k = 0; k < n; ++k) {
        const Element below = product_of(t, 0, k)[x];
        if (below == k || below == t[k]) fwd.push_back(static_cast<Element>(k));
        const Images above = product_of(t, k + 1, n);
        const Element pre = static_cast<Element>(std::find(above.begin(), above.end(), x) - above.begin());
        if (pre == k || pre == t[k]) inv.push_back(static_cast<Element>(k));
      }
      ASSERT_EQ(active_set(f, x).members, fwd);
      ASSERT_EQ(inverse_active_set(f, x).members, inv);
    }
  }
}

TEST(ActiveSets, ApplyViaActiveAgreesWithLookup) {
  const std::size_t n = 6;
  for (std::uint64_t i = 0; i < factorial(n); ++i) {
    const auto f = MonotoneFactorization::from_index(n, i);
    const Images p = product_of(values_of(f), 0, n);
    for (Element x = 0; x < n; ++x) {
      ASSERT_EQ(apply_via_active(f, x, ActiveKind::forward), p[x]);
      ASSERT_EQ(p[apply_via_active(f, x, ActiveKind::inverse)], x);
    }
  }
}

TEST(ActiveSets, MembershipEventsAreIndependent) {
  const std::size_t n = 5;
  const double total = static_cast<double>(factorial(n));
  for (Element x = 0; x < n; ++x) {
    std::vector<double> single(n, 0.0);
    std::vector<std::vector<double>> pair(n, std::vector<double>(n, 0.0));
    for (std::uint64_t i = 0; i < factorial(n); ++i) {
      const auto a = active_set(MonotoneFactorization::from_index(n, i), x);
      for (Element k : a.members) {
        single[k] += 1.0 / total;
        for (Element l : a.members) pair[k][l] += 1.0 / total;
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double expected = k < x ? 0.0 : (k == x ? 1.0 : 1.0 / static_cast<double>(k + 1));
      EXPECT_NEAR(single[k], expected, 1e-12);
      for (std::size_t l = 0; l < n; ++l)
        if (l != k) EXPECT_NEAR(pair[k][l], single[k] * single[l], 1e-12);
    }
  }
}

TEST(ActiveSets, WrongSideImageIsUniform) {
  const std::size_t n = 5;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> counts(n, 0);
    for (std::uint64_t i = 0; i < factorial(n); ++i)
      ++counts[partial_product(MonotoneFactorization::from_index(n, i), k, Side::above)(static_cast<Element>(k))];
    for (std::size_t l = k + 1; l < n; ++l)
      EXPECT_EQ(counts[l] * n, factorial(n)) << "k=" << k << " l=" << l;
  }
}

TEST(ExpectedActiveSize, ForwardEqualsHarmonicTail) {
  using boost::multiprecision::cpp_rational;
  // Membership probabilities 1 (k = x) and 1/k (k > x) sum to 1 + H_N - H_x.
  EXPECT_DOUBLE_EQ(expected_active_size(2, 0, ActiveKind::forward, ExpectationMethod::exact).mean, 1.5);
  for (std::size_t n = 1; n <= 7; ++n)
    for (Element x = 0; x < n; ++x) {
      cpp_rational expected = 1;
      for (std::size_t k = x + 2; k <= n; ++k) expected += cpp_rational(1, static_cast<long>(k));
      const double got = expected_active_size(n, x, ActiveKind::forward, ExpectationMethod::exact).mean;
      EXPECT_NEAR(got, static_cast<double>(expected), 1e-12);
      EXPECT_LE(got, 1.0 + std::log(static_cast<double>(n) / (x + 1.0)) + 1e-12);
    }
}

TEST(ExpectedActiveSize, InverseRecurrenceMatchesEnumeration) {
  // f(1) = 1, f(2) = 2 + (0 + 1)/2
  EXPECT_DOUBLE_EQ(active_recurrence_f(1), 1.0);
  EXPECT_DOUBLE_EQ(active_recurrence_f(2), 2.5);
  EXPECT_EQ(active_recurrence_f_exact(2), boost::multiprecision::cpp_rational(5, 2));
  for (std::size_t n = 1; n <= 7; ++n)
    for (Element y = 0; y < n; ++y) {
      double sum = 0.0;
      for (std::uint64_t i = 0; i < factorial(n); ++i)
        sum += static_cast<double>(inverse_active_set(MonotoneFactorization::from_index(n, i), y).members.size());
      const double enumerated = sum / static_cast<double>(factorial(n));
      EXPECT_NEAR(inverse_active_expectation(n, y + 1), enumerated, 1e-12);
      EXPECT_NEAR(expected_active_size(n, y, ActiveKind::inverse, ExpectationMethod::recurrence).mean, enumerated, 1e-12);
      EXPECT_LE(enumerated, 1.0 + 2.0 * y / static_cast<double>(n) + 1e-12);
      EXPECT_LT(enumerated, 3.0);
    }
  EXPECT_DOUBLE_EQ(inverse_active_expectation(50, 1), 1.0);
}

TEST(ExpectedActiveSize, MethodErrorsAndMonteCarlo) {
  EXPECT_THROW(expected_active_size(9, 0, ActiveKind::forward, ExpectationMethod::exact), SizeLimitError);
  EXPECT_THROW(expected_active_size(5, 0, ActiveKind::forward, ExpectationMethod::recurrence), UnsupportedMethodError);
  ExpectationOptions o;
  o.seed = 3;
  o.samples = 50000;
  const Estimate e = expected_active_size(6, 1, ActiveKind::forward, ExpectationMethod::monte_carlo, o);
  const double exact = expected_active_size(6, 1, ActiveKind::forward, ExpectationMethod::exact).mean;
  EXPECT_GT(e.std_error, 0.0);
  EXPECT_LT(std::abs(e.mean - exact), 4.0 * e.std_error);
}

TEST(CayleyDistance, EqualsDegreeMinusCycles) {
  const std::size_t n = 5;
  for (std::uint64_t i = 0; i < factorial(n); ++i) {
    const auto f = MonotoneFactorization::from_index(n, i);
    ASSERT_EQ(cayley_distance(f), n - count_cycles(product_of(values_of(f), 0, n)));
  }
  EXPECT_EQ(cayley_distance(monotone_factorize(Permutation::transposition(5, 4, 1))), 1u);
}

TEST(PermutationTable, RelabelMatchesComposition) {
  const PermutationTable t(4);
  std::mt19937_64 rng(9);
  const Permutation l = sample_uniform(4, rng), r = sample_uniform(4, rng);
  const auto rel = t.relabel(l, r);
  for (std::size_t i = 0; i < t.count(); ++i) {
    ASSERT_EQ(t.index_of(t.perm(i)), i);
    ASSERT_EQ(rel[i], t.index_of(l * t.perm(i) * r));
  }
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(t.stride(k), factorial(k));
}
