#include "lab_detail.hpp"

#include <cmath>
#include <stdexcept>

#include "permlab/errors.hpp"
#include "permlab/oracle_sim.hpp"

namespace permlab::detail {

std::size_t database_degree(const RegisterLayout& layout) {
  const auto& regs = layout.registers();
  std::size_t n = 0;
  while (n < regs.size() && regs[n].name == "D" + std::to_string(n + 1)) {
    if (regs[n].dim != n + 1) throw LayoutMismatchError("database register with the wrong dimension");
    ++n;
  }
  return n;
}

JointShape joint_shape(const StateVector& s) {
  const auto& regs = s.layout().registers();
  JointShape g;
  g.n = database_degree(s.layout());
  if (g.n == 0) throw LayoutMismatchError("state carries no database registers");
  if (regs.size() < g.n + 2 || regs[g.n].name != "Y" || regs[g.n + 1].name != "X")
    throw LayoutMismatchError("joint state must be ordered [D1..DN], Y, X, ...");
  if (regs[g.n].dim != g.n || regs[g.n + 1].dim != g.n) throw LayoutMismatchError("X and Y must have dimension N");
  g.db = static_cast<std::size_t>(factorial(g.n));
  g.outer = s.dim() / (g.db * g.n * g.n);
  return g;
}

void plus_complement_inplace(cplx* v, std::size_t n, std::size_t x, std::size_t blocks) {
  const auto& t = permutation_table(n);
  const std::size_t stride = t.stride(x);
  const double inv = 1.0 / static_cast<double>(x + 1);
  for (std::size_t b = 0; b < blocks; ++b) {
    cplx* block = v + b * t.count();
    for_each_group(t, x, [&](std::size_t base) {
      cplx mean = 0.0;
      for (std::size_t k = 0; k <= x; ++k) mean += block[base + k * stride];
      mean *= inv;
      for (std::size_t k = 0; k <= x; ++k) block[base + k * stride] -= mean;
    });
  }
}

void plus_inplace(cplx* v, std::size_t n, std::size_t x, std::size_t blocks) {
  const auto& t = permutation_table(n);
  const std::size_t stride = t.stride(x);
  const double inv = 1.0 / static_cast<double>(x + 1);
  for (std::size_t b = 0; b < blocks; ++b) {
    cplx* block = v + b * t.count();
    for_each_group(t, x, [&](std::size_t base) {
      cplx mean = 0.0;
      for (std::size_t k = 0; k <= x; ++k) mean += block[base + k * stride];
      mean *= inv;
      for (std::size_t k = 0; k <= x; ++k) block[base + k * stride] = mean;
    });
  }
}

void relation_mask_inplace(cplx* v, const Relation& r, std::size_t x, std::size_t blocks, bool keep_members) {
  const auto& t = permutation_table(r.n());
  for (std::size_t d = 0; d < t.count(); ++d) {
    const bool member = r.contains(static_cast<Element>(x), t.image(d, static_cast<Element>(x)));
    if (member == keep_members) continue;
    for (std::size_t b = 0; b < blocks; ++b) v[b * t.count() + d] = 0.0;
  }
}

Element above_apply(const PermutationTable& t, std::size_t d, std::size_t x, Element v) {
  for (std::size_t k = x + 1; k < t.n(); ++k) {
    const Element tk = t.factor(d, k);
    if (v == k) v = tk;
    else if (v == tk) v = static_cast<Element>(k);
  }
  return v;
}

Element above_apply_inverse(const PermutationTable& t, std::size_t d, std::size_t x, Element v) {
  for (std::size_t k = t.n(); k-- > x + 1;) {
    const Element tk = t.factor(d, k);
    if (v == k) v = tk;
    else if (v == tk) v = static_cast<Element>(k);
  }
  return v;
}

std::vector<TwirlPair> twirl_pairs(std::size_t n, const TwirlSampling& mode) {
  std::vector<TwirlPair> out;
  if (mode.exhaustive()) {
    if (n > kExhaustiveTwirlCeiling) throw SizeLimitError("exhaustive twirl averages are limited to N <= 4; pass a seed");
    const auto& t = permutation_table(n);
    out.reserve(t.count() * t.count());
    for (std::size_t i = 0; i < t.count(); ++i)
      for (std::size_t j = 0; j < t.count(); ++j) out.push_back({t.perm(i), t.perm(j), 0});
    return out;
  }
  if (mode.samples < 2 * n) throw std::invalid_argument("need at least two samples per stratum");
  std::mt19937_64 rng(*mode.seed);
  out.reserve(mode.samples);
  for (std::size_t i = 0; i < mode.samples; ++i) {
    Permutation sigma = sample_uniform(n, rng);
    Permutation tau = sample_uniform(n, rng);
    out.push_back({std::move(sigma), std::move(tau), i % n});
  }
  return out;
}

Estimate combine_pairs(const std::vector<TwirlPair>& pairs, const std::vector<double>& values, std::size_t n, bool exhaustive) {
  Estimate e;
  e.samples = pairs.size();
  if (exhaustive) {
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(values.size());
    return e;
  }
  std::vector<double> sum(n, 0.0), sq(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto s = pairs[i].stratum;
    sum[s] += values[i];
    sq[s] += values[i] * values[i];
    ++count[s];
  }
  double var = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double m = sum[s] / static_cast<double>(count[s]);
    e.mean += m;
    const double v = std::max(0.0, (sq[s] - static_cast<double>(count[s]) * m * m) / static_cast<double>(count[s] - 1));
    var += v / static_cast<double>(count[s]);
  }
  e.std_error = std::sqrt(var);
  return e;
}

std::vector<double> map_indices(std::size_t count, const std::function<double(std::size_t)>& body) {
  std::vector<double> out(count, 0.0);
  parallel_for(count, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = body(i);
  });
  return out;
}

}  // namespace permlab::detail
