#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "permlab/circuit.hpp"
#include "permlab/oracle_sim.hpp"

namespace permlab {

// Largest joint state a run may allocate.
inline constexpr std::size_t kAmplitudeBudget = std::size_t{1} << 28;

StateVector initial_state(const QueryCircuit& c, const OracleBackend& backend);
StateVector run(const QueryCircuit& c, const OracleBackend& backend);

struct RunTrace {
  std::vector<StateVector> pre_query;  // state right before each query, in order
  StateVector final_state;
};
RunTrace run_trace(const QueryCircuit& c, const OracleBackend& backend);

// Local building blocks.
LinearOperator xor_shift(std::size_t n, std::size_t value);
LinearOperator walsh_hadamard(std::size_t n);
LinearOperator fourier(std::size_t n);
LinearOperator phase_flip(std::size_t n, const std::vector<std::size_t>& marked);
// Householder reflection exchanging |0> and the unit vector `target`.
LinearOperator state_preparation(const Vector& target);
// 2|s><s| - I
LinearOperator reflection_about(const Vector& s);

QueryCircuit classical_probe(std::size_t n, Element x, Direction direction);
QueryCircuit fixed_guess(std::size_t n, Element x, Element y);
QueryCircuit random_circuit(std::uint64_t seed, std::size_t q, std::size_t work_dim, std::size_t n);

// x occupies the high n-c bits of X; the sponge output is the high n-c bits of Y.
QueryCircuit grover_preimage(std::size_t n_bits, std::size_t c, std::size_t target, std::size_t iterations);
// Accepts outputs whose low c bits are zero.
QueryCircuit zero_search_adversary(std::size_t n_bits, std::size_t c, std::size_t iterations);

// Born probabilities over X (index x) or X, Y (index x + N y); D and work registers are traced out.
std::vector<double> output_distribution(const StateVector& s, const OutputSpec& spec);

// {(pi, |psi_pi>/sqrt(N!))} over all of S_N with the concrete backend.
ClassicalQuantumEnsemble concrete_ensemble(const QueryCircuit& c);
// SPO (or TSPO when `twirl` is given) run followed by the full readout.
ClassicalQuantumEnsemble spo_ensemble(const QueryCircuit& c, const std::optional<Twirl>& twirl = std::nullopt);

// ------------------------------------------------------------------ attacks

enum class AttackKind { sponge, zero_search };

struct AttackConfig {
  AttackKind kind = AttackKind::sponge;
  std::size_t n_bits = 8;
  std::size_t c = 4;
  std::size_t target = 0;  // sponge only: (n-c)-bit output prefix
  std::size_t iterations = 1;
  std::size_t trials = 200;  // 0 enumerates S_N (N <= 8)
  std::uint64_t seed = 1;
  bool spo_backend = false;
};

struct AttackOutcome {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  bool exhaustive = false;
  std::size_t queries = 0;
  double reference = 0.0;         // sin^2((2k+1) asin(2^{-c/2}))
  double marked_reference = 0.0;  // the same averaged over the random marked-set size
};

QueryCircuit attack_circuit(const AttackConfig& config);
bool attack_accepts(const AttackConfig& config, const Permutation& pi, std::size_t x_label);
double attack_success(const AttackConfig& config, const StateVector& final_state, const Permutation& pi);
// Success for an SPO run: X is read together with the recovered permutation.
double attack_success_spo(const AttackConfig& config, const StateVector& final_state);
AttackOutcome run_attack(const AttackConfig& config);

// sin^2((2k+1) asin(sqrt(marked/space)))
double grover_success(std::size_t marked, std::size_t space, std::size_t iterations);
// Expected Grover success when the marked count is hypergeometric: `space` distinct outputs of a
// random permutation of [2^n_bits], `good` of which are accepted.
double grover_success_marked_average(std::size_t n_bits, std::size_t space, std::size_t good, std::size_t iterations);

// ------------------------------------------------------------ circuit files

QueryCircuit parse_circuit(std::string_view text);
QueryCircuit load_circuit(const std::string& path);

}  // namespace permlab
