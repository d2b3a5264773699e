#include "permlab/circuit.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "permlab/errors.hpp"

namespace permlab {

namespace {

// Norm preservation on a few seeded random vectors.
void probe_unitary(const LinearOperator& op, const std::string& label) {
  std::mt19937_64 rng(0xC0FFEE);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 2; ++trial) {
    Vector v(static_cast<Eigen::Index>(op.dim()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(g(rng), g(rng));
    v.normalize();
    const double n = op(v).norm();
    if (std::abs(n - 1.0) > 1e-10) throw std::invalid_argument("local step '" + label + "' is not unitary");
  }
}

}  // namespace

QueryCircuit::QueryCircuit(std::size_t n, std::vector<Register> work, std::string name)
    : n_(n), name_(std::move(name)) {
  if (n == 0) throw std::invalid_argument("circuit needs N >= 1");
  for (auto& r : work) add_work_register(std::move(r));
}

void QueryCircuit::add_work_register(Register r) {
  if (r.name == "X" || r.name == "Y" || (r.name.size() > 1 && r.name[0] == 'D' &&
                                          r.name.find_first_not_of("0123456789", 1) == std::string::npos))
    throw LayoutMismatchError("work register name '" + r.name + "' is reserved");
  for (const auto& w : work_)
    if (w.name == r.name) throw LayoutMismatchError("duplicate work register '" + r.name + "'");
  if (r.dim == 0) throw std::invalid_argument("work register of dimension 0");
  work_.push_back(std::move(r));
}

std::size_t QueryCircuit::dim_of(const std::string& name) const {
  if (name == "X" || name == "Y") return n_;
  for (const auto& w : work_)
    if (w.name == name) return w.dim;
  throw LayoutMismatchError("circuit has no register '" + name + "'");
}

void QueryCircuit::add_local(std::vector<std::string> targets, LinearOperator op, std::string label) {
  if (targets.size() != op.dims().size()) throw LayoutMismatchError("target count does not match operator");
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (dim_of(targets[i]) != op.dims()[i])
      throw LayoutMismatchError("operator dimension does not match register '" + targets[i] + "'");
  if (label.empty()) label = op.name();
  probe_unitary(op, label);
  steps_.push_back(LocalStep{std::move(targets), std::move(op), std::move(label)});
}

void QueryCircuit::add_query(Direction direction, QuerySlot slot) { steps_.push_back(QueryStep{direction, slot}); }

std::size_t QueryCircuit::query_count() const {
  std::size_t q = 0;
  for (const auto& s : steps_) q += std::holds_alternative<QueryStep>(s);
  return q;
}

RegisterLayout QueryCircuit::layout(bool with_database) const {
  std::vector<Register> regs{{"Y", n_}, {"X", n_}};
  regs.insert(regs.end(), work_.begin(), work_.end());
  RegisterLayout tail(std::move(regs));
  return with_database ? RegisterLayout::database(n_).concat(tail) : tail;
}

}  // namespace permlab
