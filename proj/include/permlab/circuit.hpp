#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "permlab/linalg_state.hpp"

namespace permlab {

enum class Direction { forward, inverse };

// Which query of a standard-form gadget a step is (plain circuits only use `first`).
enum class QuerySlot { first, second };

struct LocalStep {
  std::vector<std::string> targets;  // subset of work registers, "X", "Y"
  LinearOperator op;
  std::string label;
};

struct QueryStep {
  Direction direction = Direction::forward;
  QuerySlot slot = QuerySlot::first;
};

using CircuitStep = std::variant<LocalStep, QueryStep>;

struct OutputSpec {
  bool include_y = false;  // the answer is x in X, optionally y in Y
};

// An adversary: local unitaries interleaved with oracle queries, all starting from |0...0>.
// Joint layout: [D1..DN], Y, X, work registers in declaration order.
class QueryCircuit {
 public:
  QueryCircuit() = default;
  QueryCircuit(std::size_t n, std::vector<Register> work, std::string name = {});

  std::size_t n() const { return n_; }
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  const std::vector<Register>& work_registers() const { return work_; }
  const std::vector<CircuitStep>& steps() const { return steps_; }
  std::size_t query_count() const;

  void add_local(std::vector<std::string> targets, LinearOperator op, std::string label = {});
  void add_query(Direction direction, QuerySlot slot = QuerySlot::first);
  void add_work_register(Register r);

  RegisterLayout layout(bool with_database) const;

  OutputSpec output;

 private:
  std::size_t dim_of(const std::string& name) const;

  std::size_t n_ = 0;
  std::vector<Register> work_;
  std::vector<CircuitStep> steps_;
  std::string name_;
};

}  // namespace permlab
