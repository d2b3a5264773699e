#include "permlab/oracle_sim.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "permlab/errors.hpp"

namespace permlab {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

const PermutationTable& permutation_table(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<PermutationTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<PermutationTable>(n);
  return *slot;
}

namespace {

void require_xor(std::size_t n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("XOR oracles need N to be a power of two");
}

// Canonical joint layout: optional D1..DN block, then Y, X, then anything else.
struct Geometry {
  std::size_t n = 0;
  std::size_t db = 1;  // N! when the database is present
  std::size_t outer = 1;
  bool has_db = false;
};

Geometry geometry(const RegisterLayout& layout) {
  Geometry g;
  const auto& regs = layout.registers();
  std::size_t pos = 0;
  if (!regs.empty() && regs[0].name == "D1") {
    while (pos < regs.size() && regs[pos].name == "D" + std::to_string(pos + 1)) {
      if (regs[pos].dim != pos + 1) throw LayoutMismatchError("database register with the wrong dimension");
      ++pos;
    }
    g.has_db = true;
    g.n = pos;
    g.db = static_cast<std::size_t>(factorial(pos));
  }
  if (regs.size() < pos + 2 || regs[pos].name != "Y" || regs[pos + 1].name != "X")
    throw LayoutMismatchError("joint state must be ordered [D1..DN], Y, X, ...");
  if (regs[pos].dim != regs[pos + 1].dim) throw LayoutMismatchError("X and Y dimensions differ");
  if (g.has_db && regs[pos].dim != g.n) throw LayoutMismatchError("X dimension does not match the database");
  g.n = regs[pos].dim;
  g.outer = layout.total_dim() / (g.db * g.n * g.n);
  return g;
}

std::size_t database_size(const RegisterLayout& layout) {
  const auto g = geometry(layout);
  if (!g.has_db) throw LayoutMismatchError("state carries no database registers");
  return g.n;
}

// out[(w, x, f(x, y, d), d)] = in[(w, x, y, d)]; f must be a bijection in y.
template <typename F>
Vector shuffle_y(const Vector& in, const Geometry& g, F f) {
  Vector out(in.size());
  const std::size_t n = g.n;
  const std::size_t db = g.db;
  std::size_t i = 0;
  for (std::size_t w = 0; w < g.outer; ++w)
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t row = (w * n + x) * n;
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t d = 0; d < db; ++d, ++i) out[static_cast<Eigen::Index>((row + f(x, y, d)) * db + d)] = in[static_cast<Eigen::Index>(i)];
    }
  return out;
}

// out[(rest, rel[d])] = in[(rest, d)]
Vector shuffle_database(const Vector& in, std::size_t db, const std::vector<std::uint32_t>& rel) {
  Vector out(in.size());
  const std::size_t blocks = static_cast<std::size_t>(in.size()) / db;
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t d = 0; d < db; ++d) out[static_cast<Eigen::Index>(b * db + rel[d])] = in[static_cast<Eigen::Index>(b * db + d)];
  return out;
}

std::vector<std::size_t> xy_dims(std::size_t n, bool with_database) {
  std::vector<std::size_t> dims;
  if (with_database)
    for (std::size_t k = 1; k <= n; ++k) dims.push_back(k);
  dims.push_back(n);
  dims.push_back(n);
  return dims;
}

StateVector relabel_register(const StateVector& s, const char* reg, const Permutation& p) {
  return apply(v_oracle(p, false), s, {reg});
}

}  // namespace

// ---------------------------------------------------------------- U and V

LinearOperator u_oracle(const Permutation& p, bool inverse) {
  const std::size_t n = p.size();
  require_xor(n);
  const Permutation q = inverse ? p.inverse() : p;
  return LinearOperator::basis_permutation(
      {n, n}, [n, q](std::size_t i) { const auto x = i % n, y = i / n; return x + n * (y ^ q(static_cast<Element>(x))); },
      inverse ? "U^pi^-1" : "U^pi");
}

LinearOperator v_oracle(const Permutation& p, bool inverse) {
  const Permutation q = inverse ? p.inverse() : p;
  return LinearOperator::basis_permutation({p.size()}, [q](std::size_t x) { return q(static_cast<Element>(x)); },
                                           inverse ? "V^pi^-1" : "V^pi");
}

LinearOperator cnot_operator(std::size_t n) {
  require_xor(n);
  return LinearOperator::basis_permutation(
      {n, n}, [n](std::size_t i) { const auto a = i % n, b = i / n; return a + n * (b ^ a); }, "CNOT");
}

LinearOperator swap_operator(std::size_t n) {
  return LinearOperator::basis_permutation({n, n}, [n](std::size_t i) { return i / n + n * (i % n); }, "SWAP");
}

// ---------------------------------------------------------------- SPO / TSPO

StateVector spo_init(std::size_t n) {
  if (n > kExactCeiling) throw SizeLimitError("SPO simulation is limited to N <= 8");
  StateVector s = uniform_state(1, "D1");
  for (std::size_t k = 2; k <= n; ++k) s = s.tensor(uniform_state(k, "D" + std::to_string(k)));
  return s;
}

StateVector spo_query(const StateVector& s, Direction direction) {
  const auto g = geometry(s.layout());
  if (!g.has_db) throw LayoutMismatchError("SPO query needs database registers");
  require_xor(g.n);
  const auto& t = permutation_table(g.n);
  if (direction == Direction::forward)
    return StateVector(s.layout(), shuffle_y(s.amplitudes(), g, [&](std::size_t x, std::size_t y, std::size_t d) {
                         return y ^ t.image(d, static_cast<Element>(x));
                       }));
  return StateVector(s.layout(), shuffle_y(s.amplitudes(), g, [&](std::size_t x, std::size_t y, std::size_t d) {
                       return y ^ t.preimage(d, static_cast<Element>(x));
                     }));
}

StateVector tspo_query(const StateVector& s, Direction direction, const Permutation& sigma, const Permutation& tau) {
  const auto g = geometry(s.layout());
  if (!g.has_db) throw LayoutMismatchError("TSPO query needs database registers");
  require_xor(g.n);
  if (sigma.size() != g.n || tau.size() != g.n) throw std::invalid_argument("twirl degree does not match N");
  const auto& t = permutation_table(g.n);
  const Permutation sigma_inv = sigma.inverse();
  const Permutation tau_inv = tau.inverse();
  if (direction == Direction::forward)
    return StateVector(s.layout(), shuffle_y(s.amplitudes(), g, [&](std::size_t x, std::size_t y, std::size_t d) {
                         return y ^ tau_inv(t.image(d, sigma(static_cast<Element>(x))));
                       }));
  return StateVector(s.layout(), shuffle_y(s.amplitudes(), g, [&](std::size_t x, std::size_t y, std::size_t d) {
                       return y ^ sigma_inv(t.preimage(d, tau(static_cast<Element>(x))));
                     }));
}

namespace {
std::vector<std::uint32_t> twirl_relabel(std::size_t n, TwirlSide side, const Permutation& p) {
  if (p.size() != n) throw std::invalid_argument("twirl degree does not match N");
  const auto& t = permutation_table(n);
  const auto id = Permutation::identity(n);
  return side == TwirlSide::left ? t.relabel(p, id) : t.relabel(id, p.inverse());
}
}  // namespace

StateVector twirl(const StateVector& s, TwirlSide side, const Permutation& p) {
  const auto& regs = s.layout().registers();
  std::size_t n = 0;
  while (n < regs.size() && regs[n].name == "D" + std::to_string(n + 1)) {
    if (regs[n].dim != n + 1) throw LayoutMismatchError("database register with the wrong dimension");
    ++n;
  }
  if (n == 0) throw LayoutMismatchError("state carries no database registers");
  const auto rel = twirl_relabel(n, side, p);
  return StateVector(s.layout(), shuffle_database(s.amplitudes(), static_cast<std::size_t>(factorial(n)), rel));
}

LinearOperator spo_query_operator(std::size_t n, Direction direction) {
  require_xor(n);
  const auto& t = permutation_table(n);
  const std::size_t db = t.count();
  return LinearOperator::basis_permutation(
      xy_dims(n, true),
      [&t, n, db, direction](std::size_t i) {
        const auto d = i % db, y = (i / db) % n, x = i / (db * n);
        const auto v = direction == Direction::forward ? t.image(d, static_cast<Element>(x)) : t.preimage(d, static_cast<Element>(x));
        return d + db * ((y ^ v) + n * x);
      },
      direction == Direction::forward ? "O" : "O^inv");
}

LinearOperator tspo_query_operator(std::size_t n, Direction direction, const Permutation& sigma, const Permutation& tau) {
  require_xor(n);
  const auto& t = permutation_table(n);
  const std::size_t db = t.count();
  const Permutation si = sigma.inverse(), ti = tau.inverse();
  return LinearOperator::basis_permutation(
      xy_dims(n, true),
      [&](std::size_t i) {
        const auto d = i % db, y = (i / db) % n, x = i / (db * n);
        const auto v = direction == Direction::forward ? ti(t.image(d, sigma(static_cast<Element>(x))))
                                                       : si(t.preimage(d, tau(static_cast<Element>(x))));
        return d + db * ((y ^ v) + n * x);
      },
      direction == Direction::forward ? "O_tspo" : "O_tspo^inv");
}

LinearOperator twirl_operator(std::size_t n, TwirlSide side, const Permutation& p, bool with_xy) {
  const auto rel = twirl_relabel(n, side, p);
  const std::size_t db = rel.size();
  std::vector<std::size_t> dims;
  for (std::size_t k = 1; k <= n; ++k) dims.push_back(k);
  if (with_xy) {
    dims.push_back(n);
    dims.push_back(n);
  }
  return LinearOperator::basis_permutation(
      dims, [&rel, db](std::size_t i) { return (i / db) * db + rel[i % db]; }, side == TwirlSide::left ? "L" : "R");
}

LinearOperator spo_slice_operator(std::size_t n, Element x, Direction direction, LabelArithmetic arithmetic) {
  if (arithmetic == LabelArithmetic::bitwise_xor) require_xor(n);
  if (x >= n) throw std::out_of_range("x outside [N]");
  const auto& t = permutation_table(n);
  const std::size_t db = t.count();
  auto dims = xy_dims(n, true);
  dims.pop_back();
  return LinearOperator::basis_permutation(
      dims,
      [&t, n, db, x, direction, arithmetic](std::size_t i) {
        const auto d = i % db, y = i / db;
        const std::size_t v = direction == Direction::forward ? t.image(d, x) : t.preimage(d, x);
        const std::size_t y2 = arithmetic == LabelArithmetic::bitwise_xor ? (y ^ v) : (y + v) % n;
        return d + db * y2;
      },
      "O_x");
}

// ---------------------------------------------------------------- recovery

ClassicalQuantumEnsemble spo_recover(const StateVector& s, const std::optional<Twirl>& tw) {
  const std::size_t n = database_size(s.layout());
  const auto& t = permutation_table(n);
  const std::size_t db = t.count();
  std::vector<Register> rest(s.layout().registers().begin() + static_cast<std::ptrdiff_t>(n), s.layout().registers().end());
  const RegisterLayout residual_layout(rest);
  const std::size_t blocks = residual_layout.total_dim();
  std::optional<Permutation> tau_inv;
  if (tw) tau_inv = tw->tau.inverse();
  ClassicalQuantumEnsemble out;
  for (std::size_t d = 0; d < db; ++d) {
    Permutation label = t.perm(d);
    if (tw) label = (*tau_inv) * label * tw->sigma;
    Vector v(static_cast<Eigen::Index>(blocks));
    for (std::size_t b = 0; b < blocks; ++b) v[static_cast<Eigen::Index>(b)] = s.amplitudes()[static_cast<Eigen::Index>(b * db + d)];
    out.add(Label(label.images().begin(), label.images().end()), StateVector(residual_layout, std::move(v)));
  }
  return out;
}

std::pair<Permutation, StateVector> sample_recover(const StateVector& s, std::mt19937_64& rng, const std::optional<Twirl>& tw) {
  const auto ensemble = spo_recover(s, tw);
  std::vector<double> weights;
  for (const auto& [label, branch] : ensemble.entries()) weights.push_back(branch.squared_norm());
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  auto it = ensemble.entries().begin();
  std::advance(it, static_cast<std::ptrdiff_t>(pick(rng)));
  std::vector<Element> images(it->first.begin(), it->first.end());
  StateVector residual = it->second;
  residual.amplitudes() /= residual.norm();
  return {Permutation(std::move(images)), std::move(residual)};
}

// ---------------------------------------------------------------- backends

OracleBackend OracleBackend::concrete(Permutation pi) {
  OracleBackend b;
  b.mode_ = Mode::concrete;
  b.n_ = pi.size();
  b.pi_inv_ = pi.inverse();
  b.pi_ = std::move(pi);
  return b;
}

OracleBackend OracleBackend::spo(std::size_t n) {
  if (n > kExactCeiling) throw SizeLimitError("SPO simulation is limited to N <= 8");
  OracleBackend b;
  b.mode_ = Mode::spo;
  b.n_ = n;
  return b;
}

OracleBackend OracleBackend::tspo(Permutation sigma, Permutation tau) {
  if (sigma.size() != tau.size()) throw std::invalid_argument("sigma and tau differ in degree");
  OracleBackend b = spo(sigma.size());
  b.mode_ = Mode::tspo;
  b.sigma_ = std::move(sigma);
  b.tau_ = std::move(tau);
  return b;
}

OracleBackend OracleBackend::spo_conjugated(Permutation sigma, Permutation tau) {
  OracleBackend b = tspo(std::move(sigma), std::move(tau));
  b.mode_ = Mode::spo_conjugated;
  return b;
}

StateVector OracleBackend::initial_database() const {
  if (!has_database()) throw LayoutMismatchError("concrete backend has no database");
  return spo_init(n_);
}

StateVector OracleBackend::query(const StateVector& s, Direction direction, QuerySlot slot) const {
  switch (mode_) {
    case Mode::concrete: {
      const auto g = geometry(s.layout());
      if (g.has_db) throw LayoutMismatchError("concrete backend expects no database registers");
      if (g.n != n_) throw LayoutMismatchError("state N does not match the backend");
      require_xor(n_);
      const Permutation& p = direction == Direction::forward ? pi_ : pi_inv_;
      return StateVector(s.layout(), shuffle_y(s.amplitudes(), g, [&](std::size_t x, std::size_t y, std::size_t) {
                           return y ^ p(static_cast<Element>(x));
                         }));
    }
    case Mode::spo:
      return spo_query(s, direction);
    case Mode::tspo:
      return tspo_query(s, direction, sigma_, tau_);
    case Mode::spo_conjugated: {
      const Permutation si = sigma_.inverse(), ti = tau_.inverse();
      // O1 = V_X^{s^-1} V_Y^{t^-1} O V_X^s,   O2 = V_X^{s^-1} O V_X^s V_Y^t,
      // O3 = V_X^{t^-1} V_Y^{s^-1} O^inv V_X^t, O4 = V_X^{t^-1} O^inv V_X^t V_Y^s.
      const Permutation& in_x = direction == Direction::forward ? sigma_ : tau_;
      const Permutation& out_x = direction == Direction::forward ? si : ti;
      const Permutation& y_first = direction == Direction::forward ? ti : si;
      const Permutation& y_second = direction == Direction::forward ? tau_ : sigma_;
      StateVector v = s;
      if (slot == QuerySlot::second) v = relabel_register(v, "Y", y_second);
      v = relabel_register(v, "X", in_x);
      v = spo_query(v, direction);
      if (slot == QuerySlot::first) v = relabel_register(v, "Y", y_first);
      return relabel_register(v, "X", out_x);
    }
  }
  throw std::logic_error("unknown backend mode");
}

// ---------------------------------------------------------------- standard form

QueryCircuit standard_form(const QueryCircuit& c) {
  std::string z = "Z";
  for (const auto& w : c.work_registers())
    if (w.name == z) z += "'";
  auto work = c.work_registers();
  work.push_back({z, c.n()});
  QueryCircuit out(c.n(), work, c.name().empty() ? std::string("standard") : c.name() + "/standard");
  out.output = c.output;
  for (const auto& step : c.steps()) {
    if (const auto* local = std::get_if<LocalStep>(&step)) {
      out.add_local(local->targets, local->op, local->label);
      continue;
    }
    const auto& q = std::get<QueryStep>(step);
    out.add_local({"Y", z}, swap_operator(c.n()), "SWAP");
    out.add_query(q.direction, QuerySlot::first);
    out.add_local({"Y", z}, cnot_operator(c.n()), "CNOT");
    out.add_query(q.direction, QuerySlot::second);
    out.add_local({"Y", z}, swap_operator(c.n()), "SWAP");
  }
  return out;
}

}  // namespace permlab
