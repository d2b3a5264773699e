#include "permlab/linalg_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "permlab/errors.hpp"

namespace permlab {

// ------------------------------------------------------------- RegisterLayout

RegisterLayout::RegisterLayout(std::vector<Register> registers) : registers_(std::move(registers)) {
  strides_.reserve(registers_.size());
  total_ = 1;
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    const auto& r = registers_[i];
    if (r.dim == 0) throw std::invalid_argument("register '" + r.name + "' has dimension 0");
    for (std::size_t j = 0; j < i; ++j)
      if (registers_[j].name == r.name) throw LayoutMismatchError("duplicate register '" + r.name + "'");
    strides_.push_back(total_);
    if (total_ > std::numeric_limits<std::size_t>::max() / r.dim) throw BudgetError("layout dimension overflows");
    total_ *= r.dim;
  }
}

RegisterLayout RegisterLayout::database(std::size_t n) {
  std::vector<Register> regs;
  for (std::size_t k = 1; k <= n; ++k) regs.push_back({"D" + std::to_string(k), k});
  return RegisterLayout(std::move(regs));
}

RegisterLayout RegisterLayout::concat(const RegisterLayout& more) const {
  auto regs = registers_;
  regs.insert(regs.end(), more.registers_.begin(), more.registers_.end());
  return RegisterLayout(std::move(regs));
}

std::size_t RegisterLayout::position(std::string_view name) const {
  for (std::size_t i = 0; i < registers_.size(); ++i)
    if (registers_[i].name == name) return i;
  throw LayoutMismatchError("no register named '" + std::string(name) + "'");
}

bool RegisterLayout::contains(std::string_view name) const {
  return std::any_of(registers_.begin(), registers_.end(), [&](const Register& r) { return r.name == name; });
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(RegisterLayout layout, Vector amps) : layout_(std::move(layout)), amps_(std::move(amps)) {
  if (static_cast<std::size_t>(amps_.size()) != layout_.total_dim())
    throw LayoutMismatchError("amplitude count does not match the layout");
}

StateVector StateVector::zero(RegisterLayout layout) {
  const auto d = layout.total_dim();
  return StateVector(std::move(layout), Vector::Zero(static_cast<Eigen::Index>(d)));
}

StateVector StateVector::basis(RegisterLayout layout, std::size_t index) {
  auto s = zero(std::move(layout));
  if (index >= s.dim()) throw std::out_of_range("basis index beyond the layout");
  s.amps_[static_cast<Eigen::Index>(index)] = 1.0;
  return s;
}

cplx StateVector::inner(const StateVector& other) const {
  if (!(layout_ == other.layout_)) throw LayoutMismatchError("inner product across different layouts");
  return amps_.dot(other.amps_);
}

StateVector StateVector::tensor(const StateVector& other) const {
  auto layout = layout_.concat(other.layout_);
  Vector v(static_cast<Eigen::Index>(layout.total_dim()));
  const auto lo = amps_.size();
  for (Eigen::Index j = 0; j < other.amps_.size(); ++j) v.segment(j * lo, lo) = other.amps_[j] * amps_;
  return StateVector(std::move(layout), std::move(v));
}

StateVector uniform_state(std::size_t dim, std::string name) {
  if (dim == 0) throw std::invalid_argument("uniform_state needs dim >= 1");
  return StateVector(RegisterLayout({{std::move(name), dim}}),
                     Vector::Constant(static_cast<Eigen::Index>(dim), cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0)));
}

StateVector random_state(const RegisterLayout& layout, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(static_cast<Eigen::Index>(layout.total_dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(g(rng), g(rng));
  v.normalize();
  return StateVector(layout, std::move(v));
}

Matrix random_unitary(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix z(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = cplx(g(rng), g(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    const double a = std::abs(rjj);
    q.col(j) *= a > 0 ? rjj / a : cplx(1.0);
  }
  return q;
}

// ------------------------------------------------------------- LinearOperator

namespace {
std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (auto d : dims) {
    if (d == 0) throw std::invalid_argument("operator dimension 0");
    p *= d;
  }
  return p;
}
}  // namespace

LinearOperator::LinearOperator(std::vector<std::size_t> dims, Kernel apply, Kernel adjoint, bool unitary, std::string name)
    : dims_(std::move(dims)), dim_(product(dims_)), apply_(std::move(apply)), adjoint_(std::move(adjoint)),
      unitary_(unitary), name_(std::move(name)) {
  if (!apply_) throw std::invalid_argument("operator without an application rule");
}

LinearOperator LinearOperator::dense(std::vector<std::size_t> dims, Matrix m, std::string name) {
  const auto d = static_cast<Eigen::Index>(product(dims));
  if (m.rows() != d || m.cols() != d) throw LayoutMismatchError("dense matrix does not match operator dims");
  const bool unitary = (m.adjoint() * m - Matrix::Identity(d, d)).norm() <= 1e-10 * std::max<double>(1.0, static_cast<double>(d));
  auto shared = std::make_shared<Matrix>(std::move(m));
  auto fwd = [shared, d](const cplx* in, cplx* out) {
    Eigen::Map<Vector>(out, d).noalias() = (*shared) * Eigen::Map<const Vector>(in, d);
  };
  auto adj = [shared, d](const cplx* in, cplx* out) {
    Eigen::Map<Vector>(out, d).noalias() = shared->adjoint() * Eigen::Map<const Vector>(in, d);
  };
  LinearOperator op(std::move(dims), fwd, adj, unitary, std::move(name));
  op.matrix_ = shared;
  return op;
}

LinearOperator LinearOperator::identity(std::vector<std::size_t> dims) {
  const auto d = product(dims);
  auto copy = [d](const cplx* in, cplx* out) { std::copy(in, in + d, out); };
  return LinearOperator(std::move(dims), copy, copy, true, "I");
}

LinearOperator LinearOperator::basis_permutation(std::vector<std::size_t> dims, const std::function<std::size_t(std::size_t)>& map,
                                                 std::string name) {
  const auto d = product(dims);
  auto fwd = std::make_shared<std::vector<std::size_t>>(d);
  auto inv = std::make_shared<std::vector<std::size_t>>(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto j = map(i);
    if (j >= d || (*inv)[j] != d) throw std::invalid_argument("basis map is not a bijection");
    (*fwd)[i] = j;
    (*inv)[j] = i;
  }
  auto apply = [fwd, d](const cplx* in, cplx* out) {
    for (std::size_t i = 0; i < d; ++i) out[(*fwd)[i]] = in[i];
  };
  auto adjoint = [inv, d](const cplx* in, cplx* out) {
    for (std::size_t j = 0; j < d; ++j) out[(*inv)[j]] = in[j];
  };
  return LinearOperator(std::move(dims), apply, adjoint, true, std::move(name));
}

LinearOperator LinearOperator::diagonal(std::vector<std::size_t> dims, Vector diag, std::string name) {
  const auto d = product(dims);
  if (static_cast<std::size_t>(diag.size()) != d) throw LayoutMismatchError("diagonal length does not match operator dims");
  bool unitary = true;
  for (Eigen::Index i = 0; i < diag.size(); ++i) unitary = unitary && std::abs(std::abs(diag[i]) - 1.0) <= 1e-12;
  auto shared = std::make_shared<Vector>(std::move(diag));
  auto apply = [shared, d](const cplx* in, cplx* out) {
    for (std::size_t i = 0; i < d; ++i) out[i] = (*shared)[static_cast<Eigen::Index>(i)] * in[i];
  };
  auto adjoint = [shared, d](const cplx* in, cplx* out) {
    for (std::size_t i = 0; i < d; ++i) out[i] = std::conj((*shared)[static_cast<Eigen::Index>(i)]) * in[i];
  };
  return LinearOperator(std::move(dims), apply, adjoint, unitary, std::move(name));
}

Vector LinearOperator::operator()(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != dim_) throw LayoutMismatchError("vector length does not match operator");
  Vector out(v.size());
  apply_(v.data(), out.data());
  return out;
}

void LinearOperator::adjoint_raw(const cplx* in, cplx* out) const {
  if (!adjoint_) throw UnsupportedMethodError("operator '" + name_ + "' has no adjoint rule");
  adjoint_(in, out);
}

Vector LinearOperator::adjoint(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != dim_) throw LayoutMismatchError("vector length does not match operator");
  Vector out(v.size());
  adjoint_raw(v.data(), out.data());
  return out;
}

Matrix LinearOperator::to_dense(std::size_t cap) const {
  if (dim_ > cap) throw SizeLimitError("operator too large for a dense matrix");
  const auto d = static_cast<Eigen::Index>(dim_);
  Matrix m(d, d);
  Vector e = Vector::Zero(d);
  Vector col(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    e[j] = 1.0;
    apply_(e.data(), col.data());
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

LinearOperator LinearOperator::dagger() const {
  if (!adjoint_) throw UnsupportedMethodError("operator '" + name_ + "' has no adjoint rule");
  LinearOperator op(dims_, adjoint_, apply_, unitary_, name_ + "^dag");
  op.matrix_ = matrix_;
  op.matrix_adjoint_ = !matrix_adjoint_;
  return op;
}

LinearOperator compose(const LinearOperator& a, const LinearOperator& b) {
  if (a.dims() != b.dims()) throw LayoutMismatchError("composing operators on different spaces");
  const auto d = a.dim();
  auto apply = [a, b, d](const cplx* in, cplx* out) {
    std::vector<cplx> tmp(d);
    b.apply_raw(in, tmp.data());
    a.apply_raw(tmp.data(), out);
  };
  LinearOperator::Kernel adjoint;
  if (a.has_adjoint() && b.has_adjoint()) {
    adjoint = [a, b, d](const cplx* in, cplx* out) {
      std::vector<cplx> tmp(d);
      a.adjoint_raw(in, tmp.data());
      b.adjoint_raw(tmp.data(), out);
    };
  }
  return LinearOperator(a.dims(), apply, adjoint, a.is_unitary() && b.is_unitary(), a.name() + "*" + b.name());
}

LinearOperator linear_combination(cplx alpha, const LinearOperator& a, cplx beta, const LinearOperator& b) {
  if (a.dims() != b.dims()) throw LayoutMismatchError("combining operators on different spaces");
  const auto d = a.dim();
  auto apply = [=](const cplx* in, cplx* out) {
    std::vector<cplx> tmp(d);
    a.apply_raw(in, out);
    b.apply_raw(in, tmp.data());
    for (std::size_t i = 0; i < d; ++i) out[i] = alpha * out[i] + beta * tmp[i];
  };
  LinearOperator::Kernel adjoint;
  if (a.has_adjoint() && b.has_adjoint()) {
    adjoint = [=](const cplx* in, cplx* out) {
      std::vector<cplx> tmp(d);
      a.adjoint_raw(in, out);
      b.adjoint_raw(in, tmp.data());
      for (std::size_t i = 0; i < d; ++i) out[i] = std::conj(alpha) * out[i] + std::conj(beta) * tmp[i];
    };
  }
  return LinearOperator(a.dims(), apply, adjoint, false, a.name() + "+" + b.name());
}

LinearOperator commutator(const LinearOperator& a, const LinearOperator& b) {
  return linear_combination(1.0, compose(a, b), -1.0, compose(b, a));
}

// ------------------------------------------------------------------ apply

namespace {

struct Embedding {
  std::vector<std::size_t> offsets;  // operator index -> state offset
  std::vector<std::size_t> bases;    // offsets of the untouched registers
};

Embedding make_embedding(const LinearOperator& op, const RegisterLayout& layout, const std::vector<std::string>& targets) {
  if (targets.size() != op.dims().size()) throw LayoutMismatchError("target count does not match operator");
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto p = layout.position(targets[i]);
    if (layout.registers()[p].dim != op.dims()[i])
      throw LayoutMismatchError("register '" + targets[i] + "' dimension does not match operator");
    if (std::find(pos.begin(), pos.end(), p) != pos.end()) throw LayoutMismatchError("repeated target register");
    pos.push_back(p);
  }
  Embedding e;
  e.offsets.assign(op.dim(), 0);
  for (std::size_t j = 0, block = 1; j < pos.size(); ++j) {
    const auto d = op.dims()[j];
    const auto s = layout.stride(pos[j]);
    for (std::size_t i = 0; i < op.dim(); ++i) e.offsets[i] += ((i / block) % d) * s;
    block *= d;
  }
  std::vector<std::size_t> rest;
  for (std::size_t p = 0; p < layout.size(); ++p)
    if (std::find(pos.begin(), pos.end(), p) == pos.end()) rest.push_back(p);
  std::size_t count = 1;
  for (auto p : rest) count *= layout.registers()[p].dim;
  e.bases.assign(count, 0);
  for (std::size_t j = 0, block = 1; j < rest.size(); ++j) {
    const auto d = layout.registers()[rest[j]].dim;
    const auto s = layout.stride(rest[j]);
    for (std::size_t i = 0; i < count; ++i) e.bases[i] += ((i / block) % d) * s;
    block *= d;
  }
  return e;
}

void apply_embedded(const Embedding& e, const LinearOperator& op, bool adjoint, const cplx* in, cplx* out) {
  const auto d = op.dim();
  if (const Matrix* m = op.matrix(); m && e.bases.size() > 1) {
    // Gather slices into columns and apply the matrix in blocks.
    const std::size_t block = std::max<std::size_t>(1, (1u << 16) / d);
    Matrix cols(d, std::min(block, e.bases.size())), res;
    const bool flip = adjoint != op.matrix_is_adjoint();
    for (std::size_t b0 = 0; b0 < e.bases.size(); b0 += block) {
      const std::size_t nb = std::min(block, e.bases.size() - b0);
      for (std::size_t j = 0; j < nb; ++j)
        for (std::size_t i = 0; i < d; ++i) cols(i, j) = in[e.bases[b0 + j] + e.offsets[i]];
      const auto lhs = cols.leftCols(nb);
      if (flip)
        res.noalias() = m->adjoint() * lhs;
      else
        res.noalias() = (*m) * lhs;
      for (std::size_t j = 0; j < nb; ++j)
        for (std::size_t i = 0; i < d; ++i) out[e.bases[b0 + j] + e.offsets[i]] = res(i, j);
    }
    return;
  }
  std::vector<cplx> a(d), b(d);
  for (auto base : e.bases) {
    for (std::size_t i = 0; i < d; ++i) a[i] = in[base + e.offsets[i]];
    if (adjoint)
      op.adjoint_raw(a.data(), b.data());
    else
      op.apply_raw(a.data(), b.data());
    for (std::size_t i = 0; i < d; ++i) out[base + e.offsets[i]] = b[i];
  }
}

}  // namespace

StateVector apply(const LinearOperator& op, const StateVector& s, const std::vector<std::string>& targets) {
  auto e = make_embedding(op, s.layout(), targets);
  Vector out(s.amplitudes().size());
  apply_embedded(e, op, false, s.amplitudes().data(), out.data());
  return StateVector(s.layout(), std::move(out));
}

LinearOperator embed(const LinearOperator& op, const RegisterLayout& layout, const std::vector<std::string>& targets) {
  auto e = std::make_shared<Embedding>(make_embedding(op, layout, targets));
  std::vector<std::size_t> dims;
  for (const auto& r : layout.registers()) dims.push_back(r.dim);
  auto fwd = [e, op](const cplx* in, cplx* out) { apply_embedded(*e, op, false, in, out); };
  LinearOperator::Kernel adj;
  if (op.has_adjoint()) adj = [e, op](const cplx* in, cplx* out) { apply_embedded(*e, op, true, in, out); };
  return LinearOperator(dims, fwd, adj, op.is_unitary(), op.name());
}

// ------------------------------------------------------------- operator norm

NormResult operator_norm(const LinearOperator& op, const NormOptions& options) {
  const auto d = static_cast<Eigen::Index>(op.dim());
  NormResult r;
  if (op.dim() <= options.dense_cap) {
    const Matrix m = op.to_dense(options.dense_cap);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    const double top = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    r.value = r.lower = r.upper = top;
    r.converged = true;
    r.dense = true;
    return r;
  }
  if (!op.has_adjoint()) throw UnsupportedMethodError("power iteration needs an adjoint rule");
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> g;
  Vector v(d), av(d), w(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = cplx(g(rng), g(rng));
  v.normalize();
  double lambda = 0.0;  // Rayleigh quotient of the Gram operator
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    op.apply_raw(v.data(), av.data());
    op.adjoint_raw(av.data(), w.data());
    lambda = av.squaredNorm();
    r.lower = std::max(r.lower, std::sqrt(lambda));
    r.iterations = it;
    if (lambda == 0.0) {
      for (Eigen::Index i = 0; i < d; ++i) v[i] = cplx(g(rng), g(rng));
      v.normalize();
      continue;
    }
    const double residual = (w - lambda * v).norm();
    if (residual <= options.tolerance * lambda) {
      r.converged = true;
      r.value = std::sqrt(lambda);
      r.upper = std::sqrt(lambda + residual);
      return r;
    }
    v = w / w.norm();
  }
  // Bracket from the Frobenius norm when not converged.
  double fro = 0.0;
  Vector e = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    e[j] = 1.0;
    op.apply_raw(e.data(), av.data());
    fro += av.squaredNorm();
    e[j] = 0.0;
  }
  r.value = r.lower;
  r.upper = std::sqrt(fro);
  return r;
}

// ---------------------------------------------------------------- ensembles

void ClassicalQuantumEnsemble::add(Label label, StateVector branch) {
  if (!entries_.empty() && !(entries_.begin()->second.layout() == branch.layout()))
    throw LayoutMismatchError("ensemble branches must share a layout");
  if (!entries_.emplace(std::move(label), std::move(branch)).second)
    throw std::invalid_argument("duplicate ensemble label");
}

double ClassicalQuantumEnsemble::total_probability() const {
  double p = 0.0;
  for (const auto& [label, s] : entries_) p += s.squared_norm();
  return p;
}

namespace {

double branch_distance_closed(const Vector& a, const Vector& b) {
  // ((na+nb)/2)^2 - |<a|b>|^2 = ((na-nb)/2)^2 + Gram(a, b), written in d = b - a so that nearly
  // equal branches do not cancel.
  const Vector d = b - a;
  const double na = a.squaredNorm();
  const double nd = d.squaredNorm();
  const cplx ad = a.dot(d);
  const double skew = -ad.real() - 0.5 * nd;
  // Gram(a, d) = |a|^2 |d - proj_a d|^2, taken from the residual to avoid cancellation
  const double gram = na > 0.0 ? na * (d - (ad / na) * a).squaredNorm() : 0.0;
  return std::sqrt(skew * skew + gram);
}

double branch_distance_dense(const Vector& a, const Vector& b) {
  if (a.size() > 2048) throw SizeLimitError("dense trace distance limited to 2048 dimensions");
  const Matrix diff = a * a.adjoint() - b * b.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

double trace_distance(const ClassicalQuantumEnsemble& a, const ClassicalQuantumEnsemble& b, TraceDistanceMethod method) {
  std::optional<RegisterLayout> layout;
  for (const auto* e : {&a, &b})
    for (const auto& [label, s] : e->entries()) {
      if (layout && !(*layout == s.layout())) throw LayoutMismatchError("ensembles over different layouts");
      layout = s.layout();
    }
  if (!layout) return 0.0;
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(layout->total_dim()));
  auto dist = method == TraceDistanceMethod::closed_form ? branch_distance_closed : branch_distance_dense;
  double total = 0.0;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  while (ia != a.entries().end() || ib != b.entries().end()) {
    if (ib == b.entries().end() || (ia != a.entries().end() && ia->first < ib->first)) {
      total += dist(ia->second.amplitudes(), zero);
      ++ia;
    } else if (ia == a.entries().end() || ib->first < ia->first) {
      total += dist(zero, ib->second.amplitudes());
      ++ib;
    } else {
      total += dist(ia->second.amplitudes(), ib->second.amplitudes());
      ++ia;
      ++ib;
    }
  }
  return total;
}

StateVector project_basis(const StateVector& s, std::string_view reg, const std::vector<std::size_t>& keep) {
  const auto& layout = s.layout();
  const auto pos = layout.position(reg);
  const auto d = layout.registers()[pos].dim;
  std::vector<bool> mask(d, false);
  for (auto k : keep) {
    if (k >= d) throw std::out_of_range("basis label outside the register");
    mask[k] = true;
  }
  Vector out = s.amplitudes();
  for (std::size_t i = 0; i < layout.total_dim(); ++i)
    if (!mask[layout.digit(i, pos)]) out[static_cast<Eigen::Index>(i)] = 0.0;
  return StateVector(layout, std::move(out));
}

std::vector<double> born_probabilities(const StateVector& s, const std::vector<std::string>& registers) {
  const auto& layout = s.layout();
  std::vector<std::size_t> pos;
  std::size_t count = 1;
  for (const auto& r : registers) {
    pos.push_back(layout.position(r));
    count *= layout.registers()[pos.back()].dim;
  }
  std::vector<double> p(count, 0.0);
  for (std::size_t i = 0; i < layout.total_dim(); ++i) {
    std::size_t key = 0;
    for (std::size_t j = pos.size(), block = count; j-- > 0;) {
      const auto d = layout.registers()[pos[j]].dim;
      block /= d;
      key += layout.digit(i, pos[j]) * block;
    }
    p[key] += std::norm(s.amplitudes()[static_cast<Eigen::Index>(i)]);
  }
  return p;
}

}  // namespace permlab
