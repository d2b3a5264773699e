#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "permlab/adversary.hpp"
#include "permlab/errors.hpp"
#include "permlab/oracle_sim.hpp"

using namespace permlab;

namespace {

Vector random_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(static_cast<Eigen::Index>(d));
  for (auto& a : v) a = cplx(g(rng), g(rng));
  return v;
}

RegisterLayout xy_layout(std::size_t n) { return RegisterLayout({{"X", n}, {"Y", n}}); }

// Canonical joint layout [D1..DN], Y, X.
RegisterLayout joint_layout(std::size_t n) { return RegisterLayout::database(n).concat(RegisterLayout({{"Y", n}, {"X", n}})); }

double max_gap(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Oracles, XorOracleFixtures) {
  const Permutation pi = Permutation::parse("2 3 4 1");
  const Matrix u = u_oracle(pi, false).to_dense();
  // X is the low digit: |x=1, y=0> is index 1; pi(1) = 2 so y becomes 2.
  EXPECT_NEAR(std::abs(u(1 + 4 * 2, 1)), 1.0, 1e-15);
  EXPECT_LT(max_gap(u * u, Matrix::Identity(16, 16)), 1e-15);
  const Matrix id = u_oracle(Permutation::identity(4), false).to_dense();
  for (Eigen::Index x = 0; x < 4; ++x) EXPECT_NEAR(std::abs(id(x + 4 * x, x)), 1.0, 1e-15);
  EXPECT_THROW(u_oracle(Permutation::identity(3), false), std::invalid_argument);
}

TEST(Oracles, SimulationIdentitiesAtFour) {
  std::mt19937_64 rng(21);
  const std::size_t n = 4;
  const auto l = xy_layout(n);
  for (int trial = 0; trial < 10; ++trial) {
    const Permutation pi = sample_uniform(n, rng);
    const Matrix v = embed(v_oracle(pi, false), l, {"X"}).to_dense();
    const Matrix v_inv = embed(v_oracle(pi, true), l, {"X"}).to_dense();
    const Matrix cnot = cnot_operator(n).to_dense();
    EXPECT_LT(max_gap(u_oracle(pi, false).to_dense(), v_inv * cnot * v), 1e-15);
    EXPECT_LT(max_gap(v_inv * v, Matrix::Identity(16, 16)), 1e-15);
    const Matrix chain = u_oracle(pi, true).to_dense() * swap_operator(n).to_dense() * u_oracle(pi, false).to_dense();
    for (Eigen::Index x = 0; x < Eigen::Index(n); ++x) EXPECT_LT((chain.col(x) - v.col(x)).norm(), 1e-15);
  }
}

TEST(Spo, InitialDatabaseIsUniform) {
  EXPECT_NEAR(std::abs(spo_init(1).amplitudes()[0]), 1.0, 1e-15);
  const StateVector phi = spo_init(4);
  ASSERT_EQ(phi.dim(), 24u);
  for (const auto& a : phi.amplitudes()) EXPECT_NEAR(std::abs(a - cplx(1.0 / std::sqrt(24.0))), 0.0, 1e-15);
}

TEST(Spo, QueryMatchesBasisDefinition) {
  std::mt19937_64 rng(22);
  for (std::size_t n : {2, 4}) {
    const auto& t = permutation_table(n);
    const StateVector s(joint_layout(n), random_vector(t.count() * n * n, rng));
    const Permutation sigma = sample_uniform(n, rng), tau = sample_uniform(n, rng);
    for (Direction dir : {Direction::forward, Direction::inverse}) {
      const Vector got = spo_query(s, dir).amplitudes();
      const Vector twisted = tspo_query(s, dir, sigma, tau).amplitudes();
      Vector expect = Vector::Zero(s.amplitudes().size()), expect_t = expect;
      for (std::size_t d = 0; d < t.count(); ++d) {
        const Permutation p = t.perm(d);
        for (Element y = 0; y < n; ++y)
          for (Element x = 0; x < n; ++x) {
            const std::size_t from = d + t.count() * (y + n * x);
            const Element v = dir == Direction::forward ? p(x) : p.inverse()(x);
            const Element vt = dir == Direction::forward ? tau.inverse()(p(sigma(x))) : sigma.inverse()(p.inverse()(tau(x)));
            expect[Eigen::Index(d + t.count() * ((y ^ v) + n * x))] = s.amplitudes()[Eigen::Index(from)];
            expect_t[Eigen::Index(d + t.count() * ((y ^ vt) + n * x))] = s.amplitudes()[Eigen::Index(from)];
          }
      }
      EXPECT_LT((got - expect).norm(), 1e-14);
      EXPECT_LT((twisted - expect_t).norm(), 1e-14);
      EXPECT_LT((spo_query(spo_query(s, dir), dir).amplitudes() - s.amplitudes()).norm(), 1e-14);
    }
    const Permutation id = Permutation::identity(n);
    EXPECT_LT((tspo_query(s, Direction::forward, id, id).amplitudes() - spo_query(s, Direction::forward).amplitudes()).norm(), 1e-15);
  }
}

TEST(Spo, SliceLeavesLowRegistersAlone) {
  // For X = x the slice operator acts as the identity on D_1..D_x (0-based registers below x).
  for (std::size_t n = 2; n <= 5; ++n) {
    const auto arith = (n & (n - 1)) == 0 ? LabelArithmetic::bitwise_xor : LabelArithmetic::add_mod;
    const auto& t = permutation_table(n);
    for (Element x = 0; x < n; ++x)
      for (Direction dir : {Direction::forward, Direction::inverse}) {
        const Matrix m = spo_slice_operator(n, x, dir, arith).to_dense(1u << 16);
        const std::size_t low = t.stride(x);  // digits below D_x span [0, x!)
        double leak = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
          for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (std::abs(m(r, c)) == 0.0) continue;
            const std::size_t dr = std::size_t(r) % t.count(), dc = std::size_t(c) % t.count();
            if (dr % low != dc % low) leak = std::max(leak, std::abs(m(r, c)));
          }
        EXPECT_EQ(leak, 0.0) << "n=" << n << " x=" << x;
      }
  }
}

TEST(Twirls, LeftAndRightCommuteAndRelabel) {
  std::mt19937_64 rng(23);
  const std::size_t n = 4;
  const Permutation a = sample_uniform(n, rng), b = sample_uniform(n, rng);
  const Matrix l = twirl_operator(n, TwirlSide::left, a, false).to_dense();
  const Matrix r = twirl_operator(n, TwirlSide::right, b, false).to_dense();
  EXPECT_LT(max_gap(l * r, r * l), 1e-15);
  const auto& t = permutation_table(n);
  for (std::size_t i = 0; i < t.count(); ++i) {
    EXPECT_NEAR(std::abs(l(Eigen::Index(t.index_of(a * t.perm(i))), Eigen::Index(i))), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(r(Eigen::Index(t.index_of(t.perm(i) * b.inverse())), Eigen::Index(i))), 1.0, 1e-15);
  }
}

TEST(Spo, ProbeOutputIsUniformAndRecordsTheDatabase) {
  const std::size_t n = 4;
  const QueryCircuit c = classical_probe(n, 2, Direction::forward);
  const StateVector s = run(c, OracleBackend::spo(n));
  const auto py = born_probabilities(s, {"Y"});
  for (double p : py) EXPECT_NEAR(p, 0.25, 1e-12);
  // Every recovered branch holds Y = pi(2).
  const ClassicalQuantumEnsemble recovered = spo_recover(s);
  for (const auto& [label, branch] : recovered.entries()) {
    const auto dist = born_probabilities(branch, {"Y"});
    EXPECT_NEAR(dist[label[2]], branch.squared_norm(), 1e-12);
  }
}

TEST(Spo, EnsemblesMatchConcreteOracle) {
  std::mt19937_64 rng(24);
  for (std::size_t n : {2, 4})
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const QueryCircuit c = random_circuit(seed, 2, 2, n);
      const auto concrete = concrete_ensemble(c);
      EXPECT_NEAR(concrete.total_probability(), 1.0, 1e-10);
      EXPECT_LE(trace_distance(concrete, spo_ensemble(c)), 1e-9);
      const Twirl tw{sample_uniform(n, rng), sample_uniform(n, rng)};
      EXPECT_LE(trace_distance(concrete, spo_ensemble(c, tw)), 1e-9);
    }
}

TEST(Spo, StandardFormDoublesQueries) {
  const QueryCircuit c = random_circuit(5, 3, 2, 4);
  const QueryCircuit b = standard_form(c);
  EXPECT_EQ(b.query_count(), 2 * c.query_count());
  EXPECT_LE(trace_distance(concrete_ensemble(b), spo_ensemble(b)), 1e-9);
}

TEST(Spo, InitialBudget) { EXPECT_THROW(spo_init(kExactCeiling + 1), SizeLimitError); }
