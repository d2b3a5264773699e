#include <cmath>
#include <numbers>

#include <boost/math/special_functions/binomial.hpp>
#include <gtest/gtest.h>

#include "permlab/adversary.hpp"
#include "permlab/errors.hpp"

using namespace permlab;

namespace {

double sin2(double turns, double p) {
  const double s = std::sin(turns * std::asin(std::sqrt(p)));
  return s * s;
}

// Hypergeometric average of the textbook Grover formula.
double marked_average(std::size_t pop, std::size_t space, std::size_t good, std::size_t k) {
  using boost::math::binomial_coefficient;
  double total = 0.0;
  for (std::size_t m = 0; m <= std::min(space, good); ++m) {
    if (space - m > pop - good) continue;
    const double p = binomial_coefficient<double>(unsigned(good), unsigned(m)) *
                     binomial_coefficient<double>(unsigned(pop - good), unsigned(space - m)) /
                     binomial_coefficient<double>(unsigned(pop), unsigned(space));
    total += p * sin2(2.0 * k + 1.0, double(m) / double(space));
  }
  return total;
}

AttackConfig exhaustive(AttackKind kind, std::size_t n, std::size_t c, std::size_t k) {
  AttackConfig a;
  a.kind = kind;
  a.n_bits = n;
  a.c = c;
  a.iterations = k;
  a.trials = 0;
  return a;
}

}  // namespace

TEST(Grover, ReferenceFormula) {
  EXPECT_NEAR(grover_success(1, 4, 1), 1.0, 1e-15);  // sin^2(3 pi/6)
  EXPECT_NEAR(grover_success(1, 16, 4), sin2(9.0, 1.0 / 16.0), 1e-15);
  EXPECT_NEAR(grover_success(0, 8, 3), 0.0, 1e-15);
  for (std::size_t k : {0, 1, 2})
    EXPECT_NEAR(grover_success_marked_average(3, 4, 2, k), marked_average(8, 4, 2, k), 1e-12);
  EXPECT_NEAR(grover_success_marked_average(8, 16, 16, 4), marked_average(256, 16, 16, 4), 1e-12);
}

TEST(Attacks, ZeroIterationsIsAUniformGuess) {
  // Each x-prefix meets a uniformly random output: 2^{-(n-c)} for the sponge, 2^{-c} for zero search.
  EXPECT_NEAR(run_attack(exhaustive(AttackKind::sponge, 3, 1, 0)).mean, 0.25, 1e-12);
  EXPECT_NEAR(run_attack(exhaustive(AttackKind::sponge, 3, 2, 0)).mean, 0.5, 1e-12);
  EXPECT_NEAR(run_attack(exhaustive(AttackKind::zero_search, 3, 1, 0)).mean, 0.5, 1e-12);
  EXPECT_NEAR(run_attack(exhaustive(AttackKind::zero_search, 3, 2, 0)).mean, 0.25, 1e-12);
}

TEST(Attacks, ExhaustiveSuccessIsTheMarkedSetAverage) {
  for (auto kind : {AttackKind::sponge, AttackKind::zero_search})
    for (std::size_t c : {1, 2})
      for (std::size_t k : {1, 2}) {
        const AttackOutcome o = run_attack(exhaustive(kind, 3, c, k));
        const std::size_t space = std::size_t{1} << (3 - c);
        const std::size_t good = kind == AttackKind::sponge ? (std::size_t{1} << c) : space;
        EXPECT_NEAR(o.mean, marked_average(8, space, good, k), 1e-10) << "c=" << c << " k=" << k;
        EXPECT_TRUE(o.exhaustive);
      }
}

TEST(Attacks, SpoBackendMatchesConcrete) {
  for (auto kind : {AttackKind::sponge, AttackKind::zero_search}) {
    AttackConfig a = exhaustive(kind, 3, 1, 1);
    const double concrete = run_attack(a).mean;
    a.spo_backend = true;
    EXPECT_NEAR(run_attack(a).mean, concrete, 1e-9);
  }
}

TEST(Attacks, SampledRunsReplayAndReportErrors) {
  AttackConfig a;
  a.n_bits = 6;
  a.c = 3;
  a.iterations = 1;
  a.trials = 50;
  a.seed = 17;
  const AttackOutcome x = run_attack(a), y = run_attack(a);
  EXPECT_EQ(x.mean, y.mean);
  EXPECT_GT(x.std_error, 0.0);
  EXPECT_EQ(x.queries, 2u);
  EXPECT_THROW(run_attack(exhaustive(AttackKind::sponge, 4, 2, 1)), SizeLimitError);
  EXPECT_THROW(grover_preimage(4, 0, 0, 1), std::invalid_argument);
  EXPECT_THROW(grover_preimage(4, 2, 4, 1), std::out_of_range);
}

TEST(Circuits, BuildersAndQueryCounts) {
  EXPECT_EQ(classical_probe(4, 1, Direction::inverse).query_count(), 1u);
  EXPECT_EQ(fixed_guess(4, 1, 2).query_count(), 0u);
  EXPECT_EQ(random_circuit(3, 3, 2, 4).query_count(), 3u);
  EXPECT_THROW(random_circuit(3, 1, 512, 4), BudgetError);
  // A guess outputs (x, y) with certainty.
  const auto dist = output_distribution(run(fixed_guess(4, 1, 2), OracleBackend::concrete(Permutation::identity(4))), {true});
  EXPECT_NEAR(dist[1 + 4 * 2], 1.0, 1e-15);
}

TEST(Circuits, ProbeReadsTheConcreteImage) {
  const Permutation pi = Permutation::parse("3 1 4 2");
  for (Element x = 0; x < 4; ++x) {
    const auto fwd = output_distribution(run(classical_probe(4, x, Direction::forward), OracleBackend::concrete(pi)), {true});
    EXPECT_NEAR(fwd[x + 4 * pi(x)], 1.0, 1e-15);
    const auto inv = output_distribution(run(classical_probe(4, x, Direction::inverse), OracleBackend::concrete(pi)), {true});
    EXPECT_NEAR(inv[x + 4 * pi.inverse()(x)], 1.0, 1e-15);
  }
}

TEST(CircuitFormat, ParsesEveryStatement) {
  const QueryCircuit c = parse_circuit(R"(# a small test circuit
n 4
name demo
work A 2
hadamard X
xor Y 1   # trailing comment
query forward
cnot X Y
swap X Y
phase X 3
fourier X
haar X A seed=7
query inverse
output X Y
)");
  EXPECT_EQ(c.name(), "demo");
  EXPECT_EQ(c.n(), 4u);
  EXPECT_EQ(c.query_count(), 2u);
  EXPECT_TRUE(c.output.include_y);
  ASSERT_EQ(c.work_registers().size(), 1u);
  EXPECT_EQ(c.work_registers()[0].dim, 2u);
  const StateVector s = run(c, OracleBackend::concrete(Permutation::parse("2 4 1 3")));
  EXPECT_NEAR(s.squared_norm(), 1.0, 1e-12);
}

TEST(CircuitFormat, RejectsMalformedInput) {
  EXPECT_THROW(parse_circuit("query forward\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("n 4\nquery sideways\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("n 4\nxor Z 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("n 4\nhaar X\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("n 4\nn 4\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("# nothing\n"), std::invalid_argument);
  EXPECT_THROW(load_circuit("/nonexistent/circuit.txt"), std::invalid_argument);
}
