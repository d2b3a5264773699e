#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace permlab {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

struct Register {
  std::string name;
  std::size_t dim = 1;
  friend bool operator==(const Register&, const Register&) = default;
};

// Mixed-radix layout; the first register is the least significant digit.
class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Register> registers);

  // D1..DN with dims 1..N.
  static RegisterLayout database(std::size_t n);

  RegisterLayout concat(const RegisterLayout& more_significant) const;

  const std::vector<Register>& registers() const { return registers_; }
  std::size_t size() const { return registers_.size(); }
  std::size_t total_dim() const { return total_; }
  std::size_t stride(std::size_t position) const { return strides_[position]; }
  std::size_t stride(std::string_view name) const { return strides_[position(name)]; }
  std::size_t dim(std::string_view name) const { return registers_[position(name)].dim; }
  std::size_t position(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t digit(std::size_t index, std::size_t position) const {
    return (index / strides_[position]) % registers_[position].dim;
  }

  friend bool operator==(const RegisterLayout& a, const RegisterLayout& b) { return a.registers_ == b.registers_; }

 private:
  std::vector<Register> registers_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

class StateVector {
 public:
  StateVector() = default;
  StateVector(RegisterLayout layout, Vector amps);

  static StateVector zero(RegisterLayout layout);
  static StateVector basis(RegisterLayout layout, std::size_t index);

  const RegisterLayout& layout() const { return layout_; }
  const Vector& amplitudes() const { return amps_; }
  Vector& amplitudes() { return amps_; }
  std::size_t dim() const { return layout_.total_dim(); }

  double squared_norm() const { return amps_.squaredNorm(); }
  double norm() const { return amps_.norm(); }
  cplx inner(const StateVector& other) const;  // <this|other>

  // other's registers become the more significant ones
  StateVector tensor(const StateVector& other) const;

 private:
  RegisterLayout layout_;
  Vector amps_;
};

StateVector uniform_state(std::size_t dim, std::string name = "R");
StateVector random_state(const RegisterLayout& layout, std::mt19937_64& rng);
Matrix random_unitary(std::size_t dim, std::mt19937_64& rng);

// Matrix-free operator on a product of target dimensions (first target least significant).
class LinearOperator {
 public:
  using Kernel = std::function<void(const cplx* in, cplx* out)>;

  LinearOperator() = default;
  LinearOperator(std::vector<std::size_t> dims, Kernel apply, Kernel adjoint, bool unitary, std::string name = {});

  static LinearOperator dense(std::vector<std::size_t> dims, Matrix m, std::string name = {});
  static LinearOperator identity(std::vector<std::size_t> dims);
  // |i> -> |map(i)>; map must be a bijection of [dim].
  static LinearOperator basis_permutation(std::vector<std::size_t> dims, const std::function<std::size_t(std::size_t)>& map,
                                          std::string name = {});
  static LinearOperator diagonal(std::vector<std::size_t> dims, Vector diag, std::string name = {});

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t dim() const { return dim_; }
  const std::string& name() const { return name_; }
  bool is_unitary() const { return unitary_; }
  bool has_adjoint() const { return static_cast<bool>(adjoint_); }

  Vector operator()(const Vector& v) const;
  Vector adjoint(const Vector& v) const;
  void apply_raw(const cplx* in, cplx* out) const { apply_(in, out); }
  void adjoint_raw(const cplx* in, cplx* out) const;

  Matrix to_dense(std::size_t cap = 1u << 14) const;
  LinearOperator dagger() const;
  // The stored matrix for operators built by dense(), else null.
  const Matrix* matrix() const { return matrix_.get(); }
  bool matrix_is_adjoint() const { return matrix_adjoint_; }

 private:
  std::vector<std::size_t> dims_;
  std::size_t dim_ = 0;
  Kernel apply_;
  Kernel adjoint_;
  bool unitary_ = false;
  std::string name_;
  std::shared_ptr<const Matrix> matrix_;
  bool matrix_adjoint_ = false;
};

// a * b (b applied first)
LinearOperator compose(const LinearOperator& a, const LinearOperator& b);
LinearOperator linear_combination(cplx alpha, const LinearOperator& a, cplx beta, const LinearOperator& b);
// [a, b] = ab - ba
LinearOperator commutator(const LinearOperator& a, const LinearOperator& b);

// Applies op on the named registers (in op's digit order) and the identity elsewhere.
StateVector apply(const LinearOperator& op, const StateVector& s, const std::vector<std::string>& targets);
// The operator extended to the whole layout.
LinearOperator embed(const LinearOperator& op, const RegisterLayout& layout, const std::vector<std::string>& targets);

struct NormOptions {
  std::size_t dense_cap = 4096;
  double tolerance = 1e-8;
  std::size_t max_iterations = 200000;
  std::uint64_t seed = 0x5eed;
};

struct NormResult {
  double value = 0.0;  // best estimate
  double lower = 0.0;  // certified lower bound
  double upper = 0.0;  // valid upper bound when dense or when the bracket is reported
  bool converged = false;
  bool dense = false;
  std::size_t iterations = 0;
};

NormResult operator_norm(const LinearOperator& op, const NormOptions& options = {});

using Label = std::vector<std::uint64_t>;

class ClassicalQuantumEnsemble {
 public:
  void add(Label label, StateVector branch);
  const std::map<Label, StateVector>& entries() const { return entries_; }
  double total_probability() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<Label, StateVector> entries_;
};

enum class TraceDistanceMethod { closed_form, dense };
double trace_distance(const ClassicalQuantumEnsemble& a, const ClassicalQuantumEnsemble& b,
                      TraceDistanceMethod method = TraceDistanceMethod::closed_form);

StateVector project_basis(const StateVector& s, std::string_view reg, const std::vector<std::size_t>& keep);

// Outcome distribution of measuring the given registers; index = mixed radix, first register least significant.
std::vector<double> born_probabilities(const StateVector& s, const std::vector<std::string>& registers);

}  // namespace permlab
