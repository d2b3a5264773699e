#include "permlab/adversary.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "permlab/errors.hpp"

namespace permlab {

// ------------------------------------------------------------------ running

StateVector initial_state(const QueryCircuit& c, const OracleBackend& backend) {
  if (backend.n() != c.n()) throw LayoutMismatchError("backend N does not match the circuit");
  const auto layout = c.layout(false);
  const std::size_t db = backend.has_database() ? static_cast<std::size_t>(factorial(c.n())) : 1;
  if (layout.total_dim() > kAmplitudeBudget / db) throw BudgetError("joint state exceeds the amplitude budget of 2^28");
  StateVector zero = StateVector::basis(layout, 0);
  return backend.has_database() ? backend.initial_database().tensor(zero) : zero;
}

RunTrace run_trace(const QueryCircuit& c, const OracleBackend& backend) {
  RunTrace trace;
  StateVector s = initial_state(c, backend);
  for (const auto& step : c.steps()) {
    if (const auto* local = std::get_if<LocalStep>(&step)) {
      s = apply(local->op, s, local->targets);
    } else {
      const auto& q = std::get<QueryStep>(step);
      trace.pre_query.push_back(s);
      s = backend.query(s, q.direction, q.slot);
    }
  }
  trace.final_state = std::move(s);
  return trace;
}

StateVector run(const QueryCircuit& c, const OracleBackend& backend) {
  StateVector s = initial_state(c, backend);
  for (const auto& step : c.steps()) {
    if (const auto* local = std::get_if<LocalStep>(&step))
      s = apply(local->op, s, local->targets);
    else
      s = backend.query(s, std::get<QueryStep>(step).direction, std::get<QueryStep>(step).slot);
  }
  return s;
}

// ------------------------------------------------------------ local blocks

LinearOperator xor_shift(std::size_t n, std::size_t value) {
  if (!is_power_of_two(n)) throw std::invalid_argument("xor needs a power-of-two dimension");
  if (value >= n) throw std::out_of_range("xor value outside the register");
  return LinearOperator::basis_permutation({n}, [value](std::size_t a) { return a ^ value; }, "XOR" + std::to_string(value));
}

LinearOperator walsh_hadamard(std::size_t n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("Hadamard needs a power-of-two dimension");
  auto kernel = [n](const cplx* in, cplx* out) {
    std::copy(in, in + n, out);
    for (std::size_t h = 1; h < n; h <<= 1)
      for (std::size_t i = 0; i < n; i += 2 * h)
        for (std::size_t j = i; j < i + h; ++j) {
          const cplx a = out[j], b = out[j + h];
          out[j] = a + b;
          out[j + h] = a - b;
        }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) out[i] *= scale;
  };
  return LinearOperator({n}, kernel, kernel, true, "H");
}

LinearOperator fourier(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  Matrix f(d, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k)
      f(j, k) = std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>((j * k) % d) / static_cast<double>(n));
  return LinearOperator::dense({n}, std::move(f), "F");
}

LinearOperator phase_flip(std::size_t n, const std::vector<std::size_t>& marked) {
  Vector diag = Vector::Ones(static_cast<Eigen::Index>(n));
  for (auto m : marked) {
    if (m >= n) throw std::out_of_range("phase label outside the register");
    diag[static_cast<Eigen::Index>(m)] = -1.0;
  }
  return LinearOperator::diagonal({n}, std::move(diag), "PHASE");
}

LinearOperator state_preparation(const Vector& target) {
  const std::size_t n = static_cast<std::size_t>(target.size());
  if (std::abs(target.norm() - 1.0) > 1e-12) throw std::invalid_argument("preparation target must be a unit vector");
  if (std::abs(target[0].imag()) > 1e-12) throw std::invalid_argument("preparation target needs a real <0|target>");
  Vector u = -target;
  u[0] += 1.0;
  const double nu = u.norm();
  if (nu < 1e-14) return LinearOperator::identity({n});
  u /= nu;
  auto shared = std::make_shared<Vector>(std::move(u));
  auto kernel = [shared, n](const cplx* in, cplx* out) {
    Eigen::Map<const Vector> v(in, static_cast<Eigen::Index>(n));
    const cplx overlap = shared->dot(v);
    Eigen::Map<Vector>(out, static_cast<Eigen::Index>(n)) = v - 2.0 * overlap * (*shared);
  };
  return LinearOperator({n}, kernel, kernel, true, "PREP");
}

LinearOperator reflection_about(const Vector& s) {
  const std::size_t n = static_cast<std::size_t>(s.size());
  auto shared = std::make_shared<Vector>(s.normalized());
  auto kernel = [shared, n](const cplx* in, cplx* out) {
    Eigen::Map<const Vector> v(in, static_cast<Eigen::Index>(n));
    const cplx overlap = shared->dot(v);
    Eigen::Map<Vector>(out, static_cast<Eigen::Index>(n)) = 2.0 * overlap * (*shared) - v;
  };
  return LinearOperator({n}, kernel, kernel, true, "DIFFUSE");
}

// ------------------------------------------------------------ adversaries

QueryCircuit classical_probe(std::size_t n, Element x, Direction direction) {
  if (x >= n) throw std::out_of_range("probe point outside [N]");
  QueryCircuit c(n, {}, std::string("probe-") + (direction == Direction::forward ? "fwd-" : "inv-") + std::to_string(x + 1));
  c.add_local({"X"}, xor_shift(n, x), "load x");
  c.add_query(direction);
  c.output.include_y = true;
  return c;
}

QueryCircuit fixed_guess(std::size_t n, Element x, Element y) {
  if (x >= n || y >= n) throw std::out_of_range("guess outside [N]");
  QueryCircuit c(n, {}, "guess-" + std::to_string(x + 1) + "-" + std::to_string(y + 1));
  c.add_local({"X"}, xor_shift(n, x), "load x");
  c.add_local({"Y"}, xor_shift(n, y), "load y");
  c.output.include_y = true;
  return c;
}

QueryCircuit random_circuit(std::uint64_t seed, std::size_t q, std::size_t work_dim, std::size_t n) {
  if (work_dim == 0) throw std::invalid_argument("work_dim must be at least 1");
  const std::size_t joint = n * n * work_dim;
  if (joint > 4096) throw BudgetError("random local unitaries are limited to 4096 dimensions");
  std::mt19937_64 rng(seed);
  QueryCircuit c(n, {{"A", work_dim}}, "random-s" + std::to_string(seed) + "-q" + std::to_string(q) + "-w" + std::to_string(work_dim));
  auto local = [&](std::size_t layer) {
    c.add_local({"X", "Y", "A"}, LinearOperator::dense({n, n, work_dim}, random_unitary(joint, rng)), "U" + std::to_string(layer));
  };
  local(0);
  for (std::size_t j = 0; j < q; ++j) {
    c.add_query(std::bernoulli_distribution(0.5)(rng) ? Direction::forward : Direction::inverse);
    local(j + 1);
  }
  c.output.include_y = true;
  return c;
}

namespace {

void check_attack_sizes(std::size_t n_bits, std::size_t c) {
  if (n_bits == 0 || n_bits > 16) throw std::invalid_argument("attack width must be 1..16 bits");
  if (c == 0 || c >= n_bits) throw std::invalid_argument("capacity must satisfy 1 <= c < n");
}

Vector subspace_uniform(std::size_t n_bits, std::size_t c) {
  const std::size_t n = std::size_t{1} << n_bits;
  const std::size_t space = std::size_t{1} << (n_bits - c);
  Vector s = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < space; ++x) s[static_cast<Eigen::Index>(x << c)] = 1.0 / std::sqrt(static_cast<double>(space));
  return s;
}

QueryCircuit grover_like(std::size_t n_bits, std::size_t c, std::size_t iterations, const std::vector<std::size_t>& marked_y,
                         std::string name) {
  const std::size_t n = std::size_t{1} << n_bits;
  const Vector s = subspace_uniform(n_bits, c);
  QueryCircuit circ(n, {}, std::move(name));
  circ.add_local({"X"}, state_preparation(s), "prepare");
  const auto flip = phase_flip(n, marked_y);
  const auto diffuse = reflection_about(s);
  for (std::size_t k = 0; k < iterations; ++k) {
    circ.add_query(Direction::forward);
    circ.add_local({"Y"}, flip, "phase");
    circ.add_query(Direction::forward);
    circ.add_local({"X"}, diffuse, "diffuse");
  }
  return circ;
}

}  // namespace

QueryCircuit grover_preimage(std::size_t n_bits, std::size_t c, std::size_t target, std::size_t iterations) {
  check_attack_sizes(n_bits, c);
  if (target >= (std::size_t{1} << (n_bits - c))) throw std::out_of_range("target has more than n-c bits");
  std::vector<std::size_t> marked;
  for (std::size_t low = 0; low < (std::size_t{1} << c); ++low) marked.push_back((target << c) | low);
  return grover_like(n_bits, c, iterations, marked, "sponge-grover-k" + std::to_string(iterations));
}

QueryCircuit zero_search_adversary(std::size_t n_bits, std::size_t c, std::size_t iterations) {
  check_attack_sizes(n_bits, c);
  std::vector<std::size_t> marked;
  for (std::size_t high = 0; high < (std::size_t{1} << (n_bits - c)); ++high) marked.push_back(high << c);
  return grover_like(n_bits, c, iterations, marked, "zero-search-k" + std::to_string(iterations));
}

std::vector<double> output_distribution(const StateVector& s, const OutputSpec& spec) {
  if (spec.include_y) return born_probabilities(s, {"X", "Y"});
  return born_probabilities(s, {"X"});
}

ClassicalQuantumEnsemble concrete_ensemble(const QueryCircuit& c) {
  const auto& table = permutation_table(c.n());
  const double w = 1.0 / std::sqrt(static_cast<double>(table.count()));
  ClassicalQuantumEnsemble out;
  for (std::size_t i = 0; i < table.count(); ++i) {
    const Permutation pi = table.perm(i);
    StateVector s = run(c, OracleBackend::concrete(pi));
    s.amplitudes() *= w;
    out.add(Label(pi.images().begin(), pi.images().end()), std::move(s));
  }
  return out;
}

ClassicalQuantumEnsemble spo_ensemble(const QueryCircuit& c, const std::optional<Twirl>& tw) {
  const auto backend = tw ? OracleBackend::tspo(tw->sigma, tw->tau) : OracleBackend::spo(c.n());
  return spo_recover(run(c, backend), tw);
}

// ------------------------------------------------------------------ attacks

QueryCircuit attack_circuit(const AttackConfig& config) {
  return config.kind == AttackKind::sponge ? grover_preimage(config.n_bits, config.c, config.target, config.iterations)
                                           : zero_search_adversary(config.n_bits, config.c, config.iterations);
}

bool attack_accepts(const AttackConfig& config, const Permutation& pi, std::size_t x_label) {
  const std::size_t input = (x_label >> config.c) << config.c;
  const std::size_t out = pi(static_cast<Element>(input));
  if (config.kind == AttackKind::sponge) return (out >> config.c) == config.target;
  return (out & ((std::size_t{1} << config.c) - 1)) == 0;
}

double attack_success(const AttackConfig& config, const StateVector& final_state, const Permutation& pi) {
  const auto px = born_probabilities(final_state, {"X"});
  double p = 0.0;
  for (std::size_t x = 0; x < px.size(); ++x)
    if (attack_accepts(config, pi, x)) p += px[x];
  return p;
}

double attack_success_spo(const AttackConfig& config, const StateVector& final_state) {
  double p = 0.0;
  const ClassicalQuantumEnsemble recovered = spo_recover(final_state);
  for (const auto& [label, branch] : recovered.entries()) {
    const Permutation pi(std::vector<Element>(label.begin(), label.end()));
    p += attack_success(config, branch, pi);
  }
  return p;
}

double grover_success(std::size_t marked, std::size_t space, std::size_t iterations) {
  const double theta = std::asin(std::sqrt(static_cast<double>(marked) / static_cast<double>(space)));
  const double s = std::sin(static_cast<double>(2 * iterations + 1) * theta);
  return s * s;
}

double grover_success_marked_average(std::size_t n_bits, std::size_t space, std::size_t good, std::size_t iterations) {
  const double pop = std::ldexp(1.0, static_cast<int>(n_bits));
  auto lchoose = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
  double total = 0.0;
  for (std::size_t m = 0; m <= std::min(space, good); ++m) {
    const double sm = static_cast<double>(m);
    if (static_cast<double>(space) - sm > pop - static_cast<double>(good)) continue;
    const double logp = lchoose(static_cast<double>(good), sm) + lchoose(pop - static_cast<double>(good), static_cast<double>(space) - sm) -
                        lchoose(pop, static_cast<double>(space));
    total += std::exp(logp) * grover_success(m, space, iterations);
  }
  return total;
}

AttackOutcome run_attack(const AttackConfig& config) {
  check_attack_sizes(config.n_bits, config.c);
  const std::size_t n = std::size_t{1} << config.n_bits;
  const QueryCircuit circuit = attack_circuit(config);
  AttackOutcome out;
  out.queries = circuit.query_count();
  const std::size_t space = std::size_t{1} << (config.n_bits - config.c);
  out.reference = grover_success(1, std::size_t{1} << config.c, config.iterations);
  const std::size_t good = config.kind == AttackKind::sponge ? (std::size_t{1} << config.c) : space;
  out.marked_reference = grover_success_marked_average(config.n_bits, space, good, config.iterations);

  if (config.spo_backend) {
    out.mean = attack_success_spo(config, run(circuit, OracleBackend::spo(n)));
    out.exhaustive = true;
    out.trials = static_cast<std::size_t>(factorial(n));
    return out;
  }
  if (config.trials == 0) {
    if (n > kExactCeiling) throw SizeLimitError("exhaustive attack enumeration is limited to N <= 8");
    const auto& table = permutation_table(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < table.count(); ++i) {
      const Permutation pi = table.perm(i);
      sum += attack_success(config, run(circuit, OracleBackend::concrete(pi)), pi);
    }
    out.mean = sum / static_cast<double>(table.count());
    out.exhaustive = true;
    out.trials = table.count();
    return out;
  }
  std::mt19937_64 rng(config.seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const Permutation pi = sample_uniform(n, rng);
    const double p = attack_success(config, run(circuit, OracleBackend::concrete(pi)), pi);
    sum += p;
    sum_sq += p * p;
  }
  const double m = static_cast<double>(config.trials);
  out.mean = sum / m;
  out.std_error = config.trials > 1 ? std::sqrt(std::max(0.0, (sum_sq - m * out.mean * out.mean) / (m - 1.0)) / m) : 0.0;
  out.trials = config.trials;
  return out;
}

// ------------------------------------------------------------ circuit files

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  throw std::invalid_argument("circuit line " + std::to_string(line) + ": " + msg);
}

std::size_t parse_count(std::size_t line, const std::string& tok) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(tok, &pos);
    if (pos != tok.size()) parse_error(line, "bad number '" + tok + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::invalid_argument&) {
    parse_error(line, "bad number '" + tok + "'");
  } catch (const std::out_of_range&) {
    parse_error(line, "number out of range '" + tok + "'");
  }
}

}  // namespace

QueryCircuit parse_circuit(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  std::optional<QueryCircuit> c;
  auto need = [&](std::size_t line) -> QueryCircuit& {
    if (!c) parse_error(line, "the first statement must be 'n <N>'");
    return *c;
  };
  auto reg_dim = [&](std::size_t line, const std::string& name) {
    auto& circ = need(line);
    if (name == "X" || name == "Y") return circ.n();
    for (const auto& w : circ.work_registers())
      if (w.name == name) return w.dim;
    parse_error(line, "unknown register '" + name + "'");
  };
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& cmd = tok[0];
    if (cmd == "n") {
      if (c) parse_error(line_no, "'n' given twice");
      if (tok.size() != 2) parse_error(line_no, "usage: n <N>");
      c.emplace(parse_count(line_no, tok[1]), std::vector<Register>{});
    } else if (cmd == "name") {
      if (tok.size() != 2) parse_error(line_no, "usage: name <label>");
      need(line_no).set_name(tok[1]);
    } else if (cmd == "work") {
      if (tok.size() != 3) parse_error(line_no, "usage: work <register> <dim>");
      need(line_no).add_work_register({tok[1], parse_count(line_no, tok[2])});
    } else if (cmd == "haar") {
      std::vector<std::string> regs;
      std::optional<std::uint64_t> seed;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (tok[i].rfind("seed=", 0) == 0)
          seed = parse_count(line_no, tok[i].substr(5));
        else
          regs.push_back(tok[i]);
      }
      if (regs.empty() || !seed) parse_error(line_no, "usage: haar <register>... seed=<s>");
      std::vector<std::size_t> dims;
      std::size_t joint = 1;
      for (const auto& r : regs) {
        dims.push_back(reg_dim(line_no, r));
        joint *= dims.back();
      }
      if (joint > 4096) parse_error(line_no, "haar unitary above 4096 dimensions");
      std::mt19937_64 rng(*seed);
      need(line_no).add_local(regs, LinearOperator::dense(dims, random_unitary(joint, rng)), "haar");
    } else if (cmd == "xor" || cmd == "phase") {
      if (tok.size() != 3) parse_error(line_no, "usage: " + cmd + " <register> <label>");
      const auto d = reg_dim(line_no, tok[1]);
      const auto v = parse_count(line_no, tok[2]);
      need(line_no).add_local({tok[1]}, cmd == "xor" ? xor_shift(d, v) : phase_flip(d, {v}), cmd);
    } else if (cmd == "hadamard" || cmd == "fourier") {
      if (tok.size() != 2) parse_error(line_no, "usage: " + cmd + " <register>");
      const auto d = reg_dim(line_no, tok[1]);
      need(line_no).add_local({tok[1]}, cmd == "hadamard" ? walsh_hadamard(d) : fourier(d), cmd);
    } else if (cmd == "swap" || cmd == "cnot") {
      if (tok.size() != 3) parse_error(line_no, "usage: " + cmd + " <register> <register>");
      const auto d = reg_dim(line_no, tok[1]);
      if (reg_dim(line_no, tok[2]) != d) parse_error(line_no, cmd + " needs registers of equal dimension");
      need(line_no).add_local({tok[1], tok[2]}, cmd == "swap" ? swap_operator(d) : cnot_operator(d), cmd);
    } else if (cmd == "query") {
      if (tok.size() != 2 || (tok[1] != "forward" && tok[1] != "inverse")) parse_error(line_no, "usage: query forward|inverse");
      need(line_no).add_query(tok[1] == "forward" ? Direction::forward : Direction::inverse);
    } else if (cmd == "output") {
      if (tok.size() < 2 || tok[1] != "X" || tok.size() > 3 || (tok.size() == 3 && tok[2] != "Y"))
        parse_error(line_no, "usage: output X [Y]");
      need(line_no).output.include_y = tok.size() == 3;
    } else {
      parse_error(line_no, "unknown statement '" + cmd + "'");
    }
  }
  if (!c) throw std::invalid_argument("circuit file declares no 'n'");
  return *c;
}

QueryCircuit load_circuit(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open circuit file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_circuit(buf.str());
}

}  // namespace permlab
