#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <variant>

#include "lab_detail.hpp"
#include "permlab/errors.hpp"
#include "permlab/lemma_lab.hpp"

namespace permlab {

namespace {

std::vector<std::size_t> database_dims(std::size_t n) {
  std::vector<std::size_t> dims;
  for (std::size_t k = 1; k <= n; ++k) dims.push_back(k);
  return dims;
}

std::vector<Permutation> cycles(std::size_t n, unsigned l) {
  std::vector<Permutation> out;
  auto build = [n](std::initializer_list<std::pair<Element, Element>> moves) {
    std::vector<Element> img(n);
    for (std::size_t i = 0; i < n; ++i) img[i] = static_cast<Element>(i);
    for (const auto& [from, to] : moves) img[from] = to;
    return Permutation(std::move(img));
  };
  for (Element a = 0; a < n; ++a)
    for (Element b = a + 1; b < n; ++b) {
      if (l == 2) {
        out.push_back(build({{a, b}, {b, a}}));
        continue;
      }
      for (Element c = b + 1; c < n; ++c) {
        out.push_back(build({{a, b}, {b, c}, {c, a}}));
        out.push_back(build({{a, c}, {c, b}, {b, a}}));
      }
    }
  return out;
}

using Tables = std::vector<std::vector<std::uint32_t>>;

// Index maps for R^gamma (right) or L^gamma (left) over every l-cycle, built once per (n, l, side).
const Tables& cycle_tables(std::size_t n, unsigned l, TwirlSide side) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, unsigned, TwirlSide>, Tables> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, l, side}];
  if (slot.empty()) {
    const auto& t = permutation_table(n);
    const Permutation id = Permutation::identity(n);
    for (const auto& g : cycles(n, l))
      slot.push_back(side == TwirlSide::right ? t.relabel(id, g) : t.relabel(g.inverse(), id));
  }
  return slot;
}

// out = sum_k coeff[k] * op_k(in) on `blocks` stacked database vectors, op_0 = I, op_1 = W2, op_2 = W3.
void class_sum_inplace(const cplx* in, cplx* out, std::size_t n, std::size_t blocks, const std::array<double, 3>& coeff) {
  const std::size_t db = static_cast<std::size_t>(factorial(n));
  for (std::size_t i = 0; i < db * blocks; ++i) out[i] = coeff[0] * in[i];
  for (unsigned l : {2u, 3u}) {
    const double c = coeff[l - 1];
    if (c == 0.0 || n < l) continue;
    const auto& tables = cycle_tables(n, l, TwirlSide::right);
    const double w = c / static_cast<double>(tables.size());
    for (std::size_t b = 0; b < blocks; ++b) {
      const cplx* src = in + b * db;
      cplx* dst = out + b * db;
      for (const auto& rel : tables)
        for (std::size_t j = 0; j < db; ++j) dst[j] += w * src[rel[j]];
    }
  }
}

std::array<double, 3> gamma_coefficients(std::size_t n) {
  const double nn = static_cast<double>(n);
  const double h1 = harmonic(n, 1), h2 = harmonic(n, 2), h3 = harmonic(n, 3);
  return {(h1 - h2) / nn, -2.0 * (h2 - h3) / nn, -(h1 - 3.0 * h2 + 2.0 * h3) / nn};
}

// Gamma on `blocks` stacked copies of D.
LinearOperator stacked_gamma(std::size_t n, std::vector<std::size_t> dims, std::size_t blocks) {
  const auto coeff = gamma_coefficients(n);
  if (n >= 2) cycle_tables(n, 2, TwirlSide::right);
  if (n >= 3) cycle_tables(n, 3, TwirlSide::right);
  auto k = [n, blocks, coeff](const cplx* in, cplx* out) { class_sum_inplace(in, out, n, blocks, coeff); };
  return LinearOperator(std::move(dims), k, k, false, "Gamma");
}

Matrix gamma_brute_force(std::size_t n) {
  if (n > 5) throw SizeLimitError("brute-force Gamma is limited to N <= 5");
  const auto& t = permutation_table(n);
  const std::size_t db = t.count();
  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(db));
  for (std::size_t x = 0; x < n; ++x) {
    const double xd = static_cast<double>(x) + 1.0;
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(db));
    std::vector<std::uint32_t> pre(x + 1);
    for (std::size_t si = 0; si < db; ++si)
      for (std::size_t ti = 0; ti < db; ++ti) {
        const auto rel = t.relabel(t.perm(ti).inverse(), t.perm(si));
        detail::for_each_group(t, x, [&](std::size_t base) {
          for (std::size_t k = 0; k <= x; ++k) pre[k] = rel[base + k * t.stride(x)];
          for (std::size_t a = 0; a <= x; ++a)
            for (std::size_t b = 0; b <= x; ++b) m(pre[a], pre[b]) += 1.0 / xd;
        });
      }
    m /= static_cast<double>(db * db);
    acc += (Matrix::Identity(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(db)) - m) / xd;
  }
  return acc / static_cast<double>(n);
}

LabelArithmetic arithmetic_for(std::size_t n) {
  return is_power_of_two(n) ? LabelArithmetic::bitwise_xor : LabelArithmetic::add_mod;
}

// op on D tensored with the identity on `blocks` further basis states.
LinearOperator with_blocks(const LinearOperator& op, std::size_t blocks) {
  auto dims = op.dims();
  dims.push_back(blocks);
  const std::size_t db = op.dim();
  return LinearOperator(
      std::move(dims),
      [op, db, blocks](const cplx* in, cplx* out) {
        for (std::size_t b = 0; b < blocks; ++b) op.apply_raw(in + b * db, out + b * db);
      },
      [op, db, blocks](const cplx* in, cplx* out) {
        for (std::size_t b = 0; b < blocks; ++b) op.adjoint_raw(in + b * db, out + b * db);
      },
      op.is_unitary(), op.name());
}

const Matrix& dense_gamma(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, Matrix> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (slot.size() == 0) slot = stacked_gamma(n, database_dims(n), 1).to_dense();
  return slot;
}

double max_commutator(std::size_t n, Direction dir) {
  if (n > 6) return commutator_bound(n);
  double worst = 0.0;
  for (Element x = 0; x < n; ++x) worst = std::max(worst, commutator_slice_norm(n, x, dir, CommutatorRoute::fourier_blocks));
  return worst;
}

}  // namespace

double harmonic(std::size_t n, unsigned order) {
  double sum = 0.0;
  for (std::size_t k = n; k >= 1; --k) sum += 1.0 / std::pow(static_cast<double>(k), static_cast<double>(order));
  return sum;
}

LinearOperator cycle_average(std::size_t n, unsigned l, TwirlSide side) {
  if (l != 2 && l != 3) throw std::invalid_argument("cycle length must be 2 or 3");
  if (n < l) throw std::invalid_argument("N is smaller than the cycle length");
  if (n > kExactCeiling) throw SizeLimitError("cycle averages are limited to N <= 8");
  const auto& tables = cycle_tables(n, l, side);
  const std::size_t db = static_cast<std::size_t>(factorial(n));
  auto k = [&tables, db](const cplx* in, cplx* out) {
    const double w = 1.0 / static_cast<double>(tables.size());
    std::fill(out, out + db, cplx(0.0));
    for (const auto& rel : tables)
      for (std::size_t j = 0; j < db; ++j) out[j] += w * in[rel[j]];
  };
  // Each class is closed under inversion, so the average is self-adjoint.
  return LinearOperator(database_dims(n), k, k, false, "W" + std::to_string(l));
}

LinearOperator gamma_operator(std::size_t n, GammaMethod method) {
  if (n == 0) throw std::invalid_argument("N must be positive");
  if (method == GammaMethod::brute_force) return LinearOperator::dense(database_dims(n), gamma_brute_force(n), "Gamma");
  if (n > kExactCeiling) throw SizeLimitError("Gamma is limited to N <= 8");
  return stacked_gamma(n, database_dims(n), 1);
}

double gamma_expectation(const StateVector& s) {
  const std::size_t n = detail::database_degree(s.layout());
  if (n == 0) throw LayoutMismatchError("state carries no database registers");
  const std::size_t db = static_cast<std::size_t>(factorial(n));
  const std::size_t blocks = s.dim() / db;
  Vector out(static_cast<Eigen::Index>(s.dim()));
  class_sum_inplace(s.amplitudes().data(), out.data(), n, blocks, gamma_coefficients(n));
  return s.amplitudes().dot(out).real();
}

double commutator_bound(std::size_t n) {
  const double nn = static_cast<double>(n);
  return 6.0 * (std::log(nn) + 1.0) / (nn * nn);
}

double commutator_slice_norm(std::size_t n, Element x, Direction direction, CommutatorRoute route) {
  if (n > 6) throw SizeLimitError("commutator norms are limited to N <= 6");
  if (x >= n) throw std::out_of_range("x outside [N]");
  const LabelArithmetic arith = arithmetic_for(n);
  if (route == CommutatorRoute::dense_slice) {
    if (n > 5) throw SizeLimitError("the dense slice route is limited to N <= 5");
    auto dims = database_dims(n);
    dims.push_back(n);
    const auto gamma_y = stacked_gamma(n, dims, n);
    return operator_norm(commutator(gamma_y, spo_slice_operator(n, x, direction, arith))).value;
  }
  // In the Fourier basis of Y the slice is diagonal: one block per frequency.
  const auto& t = permutation_table(n);
  const std::size_t db = t.count();
  const Matrix& g = dense_gamma(n);
  // Conjugate frequencies give conjugate blocks, and frequency 0 commutes.
  const std::size_t last = arith == LabelArithmetic::bitwise_xor ? n - 1 : n / 2;
  double worst = 0.0;
  for (std::size_t freq = 1; freq <= last; ++freq) {
    std::vector<cplx> phase(db);
    for (std::size_t d = 0; d < db; ++d) {
      const std::size_t v = direction == Direction::forward ? t.image(d, x) : t.preimage(d, x);
      if (arith == LabelArithmetic::bitwise_xor) {
        phase[d] = (std::popcount(freq & v) % 2 == 0) ? 1.0 : -1.0;
      } else {
        phase[d] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(freq * v) / static_cast<double>(n));
      }
    }
    // [Gamma, Delta] Delta^dag = Gamma - Delta Gamma Delta^dag is Hermitian with the same norm.
    Matrix h(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(db));
    for (std::size_t i = 0; i < db; ++i)
      for (std::size_t j = 0; j < db; ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        h(ii, jj) = g(ii, jj) * (1.0 - phase[i] * std::conj(phase[j]));
      }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    worst = std::max(worst, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<VerificationReport> commutator_growth_check(std::size_t n) {
  if (n < 2 || n > 6) throw SizeLimitError("commutator checks run for 2 <= N <= 6");
  const double bound = commutator_bound(n);
  const LabelArithmetic arith = arithmetic_for(n);
  std::vector<VerificationReport> out;
  for (Direction dir : {Direction::forward, Direction::inverse}) {
    const std::string tag = std::string(dir == Direction::forward ? "fwd" : "inv") + "/N=" + std::to_string(n);
    Stopwatch clock;
    double worst = 0.0;
    for (Element x = 0; x < n; ++x) {
      const double blocks = commutator_slice_norm(n, x, dir, CommutatorRoute::fourier_blocks);
      worst = std::max(worst, blocks);
      if (n <= 5) {
        const double dense = commutator_slice_norm(n, x, dir, CommutatorRoute::dense_slice);
        out.push_back(clock.stamp(VerificationReport::equality(
            "commutator-routes/" + tag + "/x=" + std::to_string(x + 1), dense, blocks, 1e-9)));
      }
    }
    out.push_back(clock.stamp(VerificationReport::exact("commutator/" + tag, worst, bound)));
    if (n >= 3) {
      // A transposition fixing x leaves pi(x) alone under R^gamma and pi^{-1}(x) alone under L^gamma.
      const Element x = 0;
      const Permutation gamma = Permutation::transposition(n, 1, 2);
      const TwirlSide side = dir == Direction::forward ? TwirlSide::right : TwirlSide::left;
      const auto twirl_y = with_blocks(twirl_operator(n, side, gamma, false), n);
      const auto comm = commutator(twirl_y, spo_slice_operator(n, x, dir, arith));
      double v = 0.0;
      Vector e = Vector::Zero(static_cast<Eigen::Index>(comm.dim()));
      for (std::size_t i = 0; i < comm.dim(); ++i) {
        e[static_cast<Eigen::Index>(i)] = 1.0;
        v = std::max(v, comm(e).cwiseAbs().maxCoeff());
        e[static_cast<Eigen::Index>(i)] = 0.0;
      }
      out.push_back(clock.stamp(VerificationReport::equality("fixed-cycle-commutes/" + tag, v, 0.0, 1e-12)));
    }
  }
  return out;
}

std::vector<VerificationReport> sparsity_trajectory_check(const QueryCircuit& c) {
  const std::size_t n = c.n();
  if (c.layout(true).total_dim() > kAmplitudeBudget) throw BudgetError("joint state exceeds the amplitude budget");
  const auto trace = run_trace(c, OracleBackend::spo(n));
  std::vector<const StateVector*> states;
  for (const auto& s : trace.pre_query) states.push_back(&s);
  states.push_back(&trace.final_state);
  std::vector<Direction> dirs;
  for (const auto& step : c.steps())
    if (const auto* q = std::get_if<QueryStep>(&step)) dirs.push_back(q->direction);

  const double nn = static_cast<double>(n);
  const double unit = 6.0 * (std::log(nn) + 1.0) / (nn * nn);
  std::vector<VerificationReport> out;
  double previous = 0.0;
  for (std::size_t j = 0; j < states.size(); ++j) {
    Stopwatch clock;
    const std::string tag = c.name() + "/j=" + std::to_string(j);
    const double value = gamma_expectation(*states[j]);
    out.push_back(clock.stamp(VerificationReport::exact("sparsity/" + tag, value, unit * static_cast<double>(j))));
    if (j > 0)
      out.push_back(clock.stamp(VerificationReport::exact("sparsity-step/" + tag, value - previous, max_commutator(n, dirs[j - 1]))));
    if (n <= kExhaustiveTwirlCeiling)
      out.push_back(clock.stamp(VerificationReport::equality("gamma-intro/" + tag, weighted_twirl_expectation(*states[j]), value, 1e-10)));
    previous = value;
  }
  return out;
}

}  // namespace permlab
