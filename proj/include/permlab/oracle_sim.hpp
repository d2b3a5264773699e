#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <utility>

#include "permlab/circuit.hpp"
#include "permlab/linalg_state.hpp"
#include "permlab/perm_core.hpp"

namespace permlab {

bool is_power_of_two(std::size_t n);

// Shared, lazily built table for S_n (n <= 8).
const PermutationTable& permutation_table(std::size_t n);

// |x, y> -> |x, y xor p^{+-1}(x)> on dims {N (X), N (Y)}.
LinearOperator u_oracle(const Permutation& p, bool inverse);
// |x> -> |p^{+-1}(x)>
LinearOperator v_oracle(const Permutation& p, bool inverse);
// |a, b> -> |a, b xor a> and |a, b> -> |b, a>, on dims {N, N}.
LinearOperator cnot_operator(std::size_t n);
LinearOperator swap_operator(std::size_t n);

StateVector spo_init(std::size_t n);

// Joint states use the canonical order [D1..DN], Y, X, rest.
StateVector spo_query(const StateVector& s, Direction direction);
StateVector tspo_query(const StateVector& s, Direction direction, const Permutation& sigma, const Permutation& tau);

enum class TwirlSide { left, right };
// left: |pi> -> |p pi>;  right: |pi> -> |pi p^{-1}>. Acts on the database of any canonical joint state.
StateVector twirl(const StateVector& s, TwirlSide side, const Permutation& p);

// The same maps as operators on (D1..DN, Y, X) or on the database alone.
LinearOperator spo_query_operator(std::size_t n, Direction direction);
LinearOperator tspo_query_operator(std::size_t n, Direction direction, const Permutation& sigma, const Permutation& tau);
LinearOperator twirl_operator(std::size_t n, TwirlSide side, const Permutation& p, bool with_xy);

// y combined with the oracle value by XOR, or by addition mod N where XOR is unavailable.
enum class LabelArithmetic { bitwise_xor, add_mod };

// The X = x slice of the SPO query, an operator on (D1..DN, Y).
LinearOperator spo_slice_operator(std::size_t n, Element x, Direction direction,
                                  LabelArithmetic arithmetic = LabelArithmetic::bitwise_xor);

struct Twirl {
  Permutation sigma;
  Permutation tau;
};

// Full computational-basis readout of D. Labels are 0-based permutation images; with a twirl the
// label is tau^{-1} pi sigma.
ClassicalQuantumEnsemble spo_recover(const StateVector& s, const std::optional<Twirl>& twirl = std::nullopt);
// One sampled readout: the recovered permutation and the normalized residual state.
std::pair<Permutation, StateVector> sample_recover(const StateVector& s, std::mt19937_64& rng,
                                                   const std::optional<Twirl>& twirl = std::nullopt);

class OracleBackend {
 public:
  enum class Mode { concrete, spo, tspo, spo_conjugated };

  static OracleBackend concrete(Permutation pi);
  static OracleBackend spo(std::size_t n);
  static OracleBackend tspo(Permutation sigma, Permutation tau);
  // SPO queries conjugated by sigma/tau per gadget slot; reproduces TSPO on standard-form circuits.
  static OracleBackend spo_conjugated(Permutation sigma, Permutation tau);

  Mode mode() const { return mode_; }
  std::size_t n() const { return n_; }
  bool has_database() const { return mode_ != Mode::concrete; }
  const Permutation& pi() const { return pi_; }
  const Permutation& sigma() const { return sigma_; }
  const Permutation& tau() const { return tau_; }

  StateVector initial_database() const;
  StateVector query(const StateVector& s, Direction direction, QuerySlot slot) const;

 private:
  Mode mode_ = Mode::spo;
  std::size_t n_ = 0;
  Permutation pi_;
  Permutation sigma_;
  Permutation tau_;
  Permutation pi_inv_;
};

// Each query becomes SWAP(Y,Z) O' CNOT(Y->Z) O SWAP(Y,Z); a register Z of dim N is appended.
QueryCircuit standard_form(const QueryCircuit& c);

}  // namespace permlab
