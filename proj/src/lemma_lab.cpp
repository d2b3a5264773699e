#include "permlab/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lab_detail.hpp"
#include "permlab/errors.hpp"

namespace permlab {

using detail::JointShape;

namespace {

std::vector<std::size_t> database_dims(std::size_t n) {
  std::vector<std::size_t> dims;
  for (std::size_t k = 1; k <= n; ++k) dims.push_back(k);
  return dims;
}

void require_element(std::size_t n, Element x) {
  if (x >= n) throw std::out_of_range("x outside [N]");
}

double one_based(Element x) { return static_cast<double>(x) + 1.0; }

// E^{R,x} and its adjoint on `blocks` stacked copies of D.
LinearOperator stacked_progress_operator(const Relation& r, Element x, std::vector<std::size_t> dims, std::size_t blocks) {
  const std::size_t n = r.n();
  const std::size_t dim = static_cast<std::size_t>(factorial(n)) * blocks;
  return LinearOperator(
      std::move(dims),
      [r, x, n, dim, blocks](const cplx* in, cplx* out) {
        std::copy(in, in + dim, out);
        detail::plus_complement_inplace(out, n, x, blocks);
        detail::relation_mask_inplace(out, r, x, blocks);
      },
      [r, x, n, dim, blocks](const cplx* in, cplx* out) {
        std::copy(in, in + dim, out);
        detail::relation_mask_inplace(out, r, x, blocks);
        detail::plus_complement_inplace(out, n, x, blocks);
      },
      false, "E");
}

LinearOperator stacked_plus_projector(std::size_t n, Element x, std::vector<std::size_t> dims, std::size_t blocks) {
  const std::size_t dim = static_cast<std::size_t>(factorial(n)) * blocks;
  auto k = [n, x, dim, blocks](const cplx* in, cplx* out) {
    std::copy(in, in + dim, out);
    detail::plus_inplace(out, n, x, blocks);
  };
  return LinearOperator(std::move(dims), k, k, false, "P+");
}

LinearOperator stacked_relation_projector(const Relation& r, Element x, std::vector<std::size_t> dims, std::size_t blocks,
                                          bool complement) {
  const std::size_t dim = static_cast<std::size_t>(factorial(r.n())) * blocks;
  auto k = [r, x, dim, blocks, complement](const cplx* in, cplx* out) {
    std::copy(in, in + dim, out);
    detail::relation_mask_inplace(out, r, x, blocks, !complement);
  };
  return LinearOperator(std::move(dims), k, k, false, complement ? "I-Pi" : "Pi");
}

std::vector<Direction> query_directions(const QueryCircuit& c) {
  std::vector<Direction> out;
  for (const auto& step : c.steps())
    if (const auto* q = std::get_if<QueryStep>(&step)) out.push_back(q->direction);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- operators

LinearOperator relation_projector(const Relation& r, Element x) {
  require_element(r.n(), x);
  return stacked_relation_projector(r, x, database_dims(r.n()), 1, false);
}

LinearOperator plus_projector(std::size_t n, Element x) {
  require_element(n, x);
  return stacked_plus_projector(n, x, database_dims(n), 1);
}

LinearOperator progress_operator(const Relation& r, Element x) {
  require_element(r.n(), x);
  return stacked_progress_operator(r, x, database_dims(r.n()), 1);
}

Vector apply_plus_complement(const StateVector& s, Element x) {
  const std::size_t n = detail::database_degree(s.layout());
  if (n == 0) throw LayoutMismatchError("state carries no database registers");
  require_element(n, x);
  Vector out = s.amplitudes();
  detail::plus_complement_inplace(out.data(), n, x, s.dim() / static_cast<std::size_t>(factorial(n)));
  return out;
}

Vector apply_progress(const StateVector& s, const Relation& r, Element x) {
  const std::size_t n = detail::database_degree(s.layout());
  if (n != r.n()) throw LayoutMismatchError("relation size does not match the database");
  require_element(n, x);
  Vector out = s.amplitudes();
  const std::size_t blocks = s.dim() / static_cast<std::size_t>(factorial(n));
  detail::plus_complement_inplace(out.data(), n, x, blocks);
  detail::relation_mask_inplace(out.data(), r, x, blocks);
  return out;
}

// ---------------------------------------------------------------- help lemma

double help_bound(Element x, std::size_t y_count) { return std::sqrt(static_cast<double>(y_count) / one_based(x)); }

double help_norm(std::size_t n, Element x, const std::vector<Element>& y_set, NormRoute route) {
  if (n > kExactCeiling) throw SizeLimitError("help_norm is limited to N <= 8");
  require_element(n, x);
  std::vector<std::pair<Element, Element>> pairs;
  for (Element y : y_set) {
    require_element(n, y);
    pairs.emplace_back(x, y);
  }
  const Relation r = Relation::from_pairs(n, pairs);
  if (route == NormRoute::dense) {
    if (factorial(n) > 720) throw SizeLimitError("dense help_norm is limited to N <= 6");
    const LinearOperator op = compose(relation_projector(r, x), plus_projector(n, x));
    return operator_norm(op).value;
  }
  // <+_x| Pi |+_x> is diagonal on the remaining registers; its largest entry is the squared norm.
  const auto& t = permutation_table(n);
  std::size_t best = 0;
  detail::for_each_group(t, x, [&](std::size_t base) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k <= x; ++k) hits += r.contains(x, t.image(base + k * t.stride(x), x)) ? 1 : 0;
    best = std::max(best, hits);
  });
  return std::sqrt(static_cast<double>(best) / one_based(x));
}

// ---------------------------------------------------------------- experiments

namespace {

StateVector spo_final_state(const QueryCircuit& c) {
  if (!c.output.include_y) throw std::invalid_argument("the circuit must output (x, y)");
  return run(c, OracleBackend::spo(c.n()));
}

}  // namespace

double detail::accepted_weight(const StateVector& phi, const Relation& r) {
  const JointShape g = detail::joint_shape(phi);
  const auto& t = permutation_table(g.n);
  const auto& a = phi.amplitudes();
  double p = 0.0;
  for (std::size_t x = 0; x < g.n; ++x)
    for (std::size_t d = 0; d < g.db; ++d) {
      const Element y = t.image(d, static_cast<Element>(x));
      if (!r.contains(static_cast<Element>(x), y)) continue;
      for (std::size_t w = 0; w < g.outer; ++w) p += std::norm(a[static_cast<Eigen::Index>(g.index(d, y, x, w))]);
    }
  return p;
}

namespace {

// Contributions of the relation points in `xs` to p_ii (whole_rest = false) or to the p_ii upper
// bound (whole_rest = true) for one twirl pair, read off the untwirled state; one entry per relation.
std::vector<double> forensic_pair_sums(const StateVector& phi, const std::vector<Relation>& rs, const Permutation& sigma,
                                       const Permutation& tau, const std::vector<Element>& xs, bool whole_rest) {
  const JointShape g = detail::joint_shape(phi);
  const auto& t = permutation_table(g.n);
  const auto rel = t.relabel(tau.inverse(), sigma);
  const Permutation tau_inv = tau.inverse();
  const cplx* a = phi.amplitudes().data();
  const std::size_t nr = rs.size();
  std::vector<double> total(nr, 0.0);
  std::vector<cplx> v;
  std::vector<Element> ys;
  std::vector<char> ok;  // ok[k * nr + j]: member k lands in relation j
  std::vector<double> term;
  for (Element x : xs) {
    const Element s = sigma(x);
    const std::size_t stride = t.stride(s);
    const std::size_t m = s + 1;
    v.resize(m);
    ys.resize(m);
    ok.resize(m * nr);
    term.resize(m);
    detail::for_each_group(t, s, [&](std::size_t base) {
      bool any = false;
      for (std::size_t k = 0; k < m; ++k) {
        ys[k] = tau_inv(t.image(base + k * stride, s));
        for (std::size_t j = 0; j < nr; ++j) {
          ok[k * nr + j] = rs[j].contains(x, ys[k]) ? 1 : 0;
          any = any || ok[k * nr + j];
        }
      }
      if (!any) return;
      auto load = [&](std::size_t rest) {
        cplx mean = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          v[k] = a[rel[base + k * stride] + g.db * rest];
          mean += v[k];
        }
        return mean / static_cast<double>(m);
      };
      std::fill(term.begin(), term.end(), 0.0);
      if (whole_rest) {
        for (std::size_t rest = 0; rest < g.rest(); ++rest) {
          const cplx mean = load(rest);
          for (std::size_t k = 0; k < m; ++k) term[k] += std::norm(v[k] - mean);
        }
      } else {
        for (std::size_t k = 0; k < m; ++k) {
          bool needed = false;
          for (std::size_t j = 0; j < nr; ++j) needed = needed || ok[k * nr + j];
          if (!needed) continue;
          for (std::size_t w = 0; w < g.outer; ++w) {
            const cplx mean = load(ys[k] + g.n * (x + g.n * w));
            term[k] += std::norm(v[k] - mean);
          }
        }
      }
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t j = 0; j < nr; ++j)
          if (ok[k * nr + j]) total[j] += term[k];
    });
  }
  return total;
}

std::vector<Element> all_elements(std::size_t n) {
  std::vector<Element> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<Element>(i);
  return xs;
}

std::vector<Estimate> forensic_average(const StateVector& phi, const std::vector<Relation>& rs, const TwirlSampling& mode,
                                       bool whole_rest) {
  const std::size_t n = detail::joint_shape(phi).n;
  const auto pairs = detail::twirl_pairs(n, mode);
  const auto every_x = all_elements(n);
  std::vector<std::vector<double>> per_pair(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& p = pairs[i];
      per_pair[i] = mode.exhaustive() ? forensic_pair_sums(phi, rs, p.sigma, p.tau, every_x, whole_rest)
                                      : forensic_pair_sums(phi, rs, p.sigma, p.tau, {static_cast<Element>(p.stratum)}, whole_rest);
    }
  });
  std::vector<Estimate> out;
  std::vector<double> values(pairs.size());
  for (std::size_t j = 0; j < rs.size(); ++j) {
    for (std::size_t i = 0; i < pairs.size(); ++i) values[i] = per_pair[i][j];
    out.push_back(detail::combine_pairs(pairs, values, n, mode.exhaustive()));
  }
  return out;
}

void require_matching(const QueryCircuit& c, const Relation& r) {
  if (c.n() != r.n()) throw std::invalid_argument("circuit and relation sizes differ");
  if (c.layout(true).total_dim() > kAmplitudeBudget) throw BudgetError("joint state exceeds the amplitude budget");
}

}  // namespace

std::vector<ExperimentProbabilities> experiment_probabilities(const QueryCircuit& c, const std::vector<Relation>& rs,
                                                              const TwirlSampling& mode) {
  for (const auto& r : rs) require_matching(c, r);
  const StateVector phi = spo_final_state(c);
  const auto est = forensic_average(phi, rs, mode, false);
  std::vector<ExperimentProbabilities> out;
  for (std::size_t j = 0; j < rs.size(); ++j) {
    ExperimentProbabilities e;
    e.p_i = detail::accepted_weight(phi, rs[j]);
    e.p_ii = est[j].mean;
    e.p_ii_std_error = est[j].std_error;
    e.samples = est[j].samples;
    e.exhaustive = mode.exhaustive();
    out.push_back(e);
  }
  return out;
}

ExperimentProbabilities experiment_probabilities(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode) {
  return experiment_probabilities(c, std::vector<Relation>{r}, mode).front();
}

double acceptance_probability_concrete(const QueryCircuit& c, const Relation& r) {
  require_matching(c, r);
  if (!c.output.include_y) throw std::invalid_argument("the circuit must output (x, y)");
  const auto& t = permutation_table(c.n());
  double p = 0.0;
  for (std::size_t i = 0; i < t.count(); ++i) {
    const Permutation pi = t.perm(i);
    const auto dist = born_probabilities(run(c, OracleBackend::concrete(pi)), {"X", "Y"});
    for (Element x = 0; x < c.n(); ++x)
      if (r.contains(x, pi(x))) p += dist[x + c.n() * pi(x)];
  }
  return p / static_cast<double>(t.count());
}

double fundamental_rhs_constant(std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::sqrt((std::log(nn) + 1.0) / nn);
}

std::vector<VerificationReport> fundamental_check(const QueryCircuit& c, const std::vector<Relation>& rs, const TwirlSampling& mode) {
  Stopwatch clock;
  const auto probs = experiment_probabilities(c, rs, mode);
  std::vector<VerificationReport> out;
  for (std::size_t j = 0; j < rs.size(); ++j) {
    const auto& pr = probs[j];
    const double lhs = std::sqrt(pr.p_i);
    const double root = std::sqrt(std::max(0.0, pr.p_ii));
    const double rhs = root + fundamental_rhs_constant(c.n());
    const std::string name = "fundamental/" + c.name() + "/" + rs[j].name();
    if (pr.exhaustive) {
      out.push_back(clock.stamp(VerificationReport::exact(name, lhs, rhs)));
      continue;
    }
    // Delta method for sqrt, capped by the worst case sqrt(p + e) - sqrt(p) <= sqrt(e).
    const double se = pr.p_ii_std_error;
    const double root_se = root > 0.0 ? std::min(se / (2.0 * root), std::sqrt(se)) : std::sqrt(se);
    out.push_back(clock.stamp(VerificationReport::monte_carlo(name, lhs, rhs, root_se, pr.samples)));
  }
  return out;
}

VerificationReport fundamental_check(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode) {
  return fundamental_check(c, std::vector<Relation>{r}, mode).front();
}

Estimate p2_upper_bound(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode) {
  require_matching(c, r);
  return forensic_average(run(c, OracleBackend::spo(c.n())), {r}, mode, true).front();
}

Estimate progress_measure(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode) {
  require_matching(c, r);
  const std::size_t n = c.n();
  const StateVector phi = run(c, OracleBackend::spo(n));
  const auto pairs = detail::twirl_pairs(n, mode);
  const auto values = detail::map_indices(pairs.size(), [&](std::size_t i) {
    const auto& p = pairs[i];
    const StateVector twirled = twirl(twirl(phi, TwirlSide::right, p.sigma), TwirlSide::left, p.tau);
    const Relation rt = twirl_relation(r, p.sigma, p.tau);
    double sum = 0.0;
    if (mode.exhaustive()) {
      for (Element x = 0; x < n; ++x) sum += apply_progress(twirled, rt, x).squaredNorm();
    } else {
      sum = apply_progress(twirled, rt, static_cast<Element>(p.stratum)).squaredNorm();
    }
    return sum;
  });
  Estimate e = detail::combine_pairs(pairs, values, n, mode.exhaustive());
  e.mean /= static_cast<double>(n);
  e.std_error /= static_cast<double>(n);
  return e;
}

// ---------------------------------------------------------------- single-query lemmas

void require_uniform_database_weights(const StateVector& s, double tolerance) {
  const std::size_t n = detail::database_degree(s.layout());
  if (n == 0) throw LayoutMismatchError("state carries no database registers");
  const std::size_t db = static_cast<std::size_t>(factorial(n));
  const std::size_t blocks = s.dim() / db;
  const double target = 1.0 / static_cast<double>(db);
  const auto& a = s.amplitudes();
  for (std::size_t d = 0; d < db; ++d) {
    double w = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) w += std::norm(a[static_cast<Eigen::Index>(d + b * db)]);
    if (std::abs(w - target) > tolerance) throw PreconditionError("database weights are not uniform");
  }
}

namespace {

ZetaTerms zeta_terms_unchecked(const StateVector& s, Element x, const Relation& r, Direction direction) {
  const JointShape g = detail::joint_shape(s);
  const auto& t = permutation_table(g.n);
  const auto& a = s.amplitudes();
  const double xd = one_based(x);
  const double rx = static_cast<double>(r.section(x).size());
  const std::size_t stride = t.stride(x);

  // weight[z][group] = ||<pi_{x^c}| phi_z>||^2, groups enumerated in for_each_group order.
  std::vector<std::size_t> bases;
  detail::for_each_group(t, x, [&](std::size_t base) { bases.push_back(base); });
  std::vector<std::vector<double>> weight(g.n, std::vector<double>(bases.size(), 0.0));
  double slice_x = 0.0;
  for (std::size_t z = 0; z < g.n; ++z)
    for (std::size_t gi = 0; gi < bases.size(); ++gi) {
      double w = 0.0;
      for (std::size_t k = 0; k <= x; ++k)
        for (std::size_t o = 0; o < g.outer; ++o)
          for (std::size_t y = 0; y < g.n; ++y) w += std::norm(a[static_cast<Eigen::Index>(g.index(bases[gi] + k * stride, y, z, o))]);
      weight[z][gi] = w;
      if (z == x) slice_x += w;
    }

  ZetaTerms out;
  out.weighted_slice = rx / xd * slice_x;
  out.constant = rx / (xd * xd * static_cast<double>(g.n));
  if (direction == Direction::forward) {
    for (std::size_t z = 0; z < x; ++z)
      for (std::size_t gi = 0; gi < bases.size(); ++gi) {
        // pi_{x^c}: the same factors with t_x replaced by the identity
        const std::size_t cut = bases[gi] + x * stride;
        if (r.contains(x, t.image(cut, static_cast<Element>(z)))) out.third += weight[z][gi];
      }
    out.third /= xd;
    return out;
  }
  for (std::size_t gi = 0; gi < bases.size(); ++gi) {
    const std::size_t base = bases[gi];
    std::size_t landing = 0;  // |[x] ∩ pi_{>x}^{-1}(R_x)|
    for (Element k = 0; k <= x; ++k) landing += r.contains(x, detail::above_apply(t, base, x, k)) ? 1 : 0;
    for (std::size_t z = 0; z < g.n; ++z) {
      const Element pre = detail::above_apply_inverse(t, base, x, static_cast<Element>(z));
      if (r.contains(x, static_cast<Element>(z)) && pre < x) out.third += weight[z][gi];
      if (z > x && pre == x) out.fourth += static_cast<double>(landing) * weight[z][gi];
    }
  }
  out.third /= xd;
  out.fourth /= xd;
  return out;
}

}  // namespace

ZetaTerms zeta_terms(const StateVector& s, Element x, const Relation& r, Direction direction) {
  const std::size_t n = detail::joint_shape(s).n;
  if (n != r.n()) throw LayoutMismatchError("relation size does not match the database");
  require_element(n, x);
  require_uniform_database_weights(s);
  return zeta_terms_unchecked(s, x, r, direction);
}

VerificationReport query_step_check(const StateVector& s, Element x, const Relation& r, Direction direction) {
  Stopwatch clock;
  const ZetaTerms z = zeta_terms(s, x, r, direction);
  const StateVector after = spo_query(s, direction);
  const double lhs = apply_progress(after, r, x).norm() - apply_progress(s, r, x).norm();
  const double factor = direction == Direction::forward ? 2.0 : 4.0;
  const double rhs = std::sqrt(static_cast<double>(r.section(x).size()) / one_based(x)) * apply_plus_complement(s, x).norm() +
                     factor * std::sqrt(z.total());
  return clock.stamp(VerificationReport::exact(
      std::string("query-step/") + (direction == Direction::forward ? "fwd" : "inv") + "/x=" + std::to_string(x + 1), lhs, rhs));
}

std::vector<VerificationReport> easy_operator_check(const Relation& r, Element x, Direction direction) {
  const std::size_t n = r.n();
  if (n > kExhaustiveTwirlCeiling) throw SizeLimitError("dense single-query checks are limited to N <= 4");
  require_element(n, x);
  const std::string tag = std::string(direction == Direction::forward ? "fwd" : "inv") + "/x=" + std::to_string(x + 1) + "/" + r.name();
  const double bound = std::sqrt(static_cast<double>(r.section(x).size()) / one_based(x));
  std::vector<VerificationReport> out;
  {
    Stopwatch clock;
    auto dims = database_dims(n);
    dims.push_back(n);
    dims.push_back(n);
    const auto e = stacked_progress_operator(r, x, dims, n * n);
    const auto off = stacked_relation_projector(r, x, dims, n * n, true);
    const auto op = compose(e, compose(spo_query_operator(n, direction), off));
    out.push_back(clock.stamp(VerificationReport::exact("easy-i/" + tag, operator_norm(op).value, bound)));
  }
  {
    Stopwatch clock;
    auto dims = database_dims(n);
    dims.push_back(n);
    const auto e = stacked_progress_operator(r, x, dims, n);
    const auto plus = stacked_plus_projector(n, x, dims, n);
    double worst = 0.0;
    for (Element z = 0; z < n; ++z)
      worst = std::max(worst, operator_norm(compose(e, compose(spo_slice_operator(n, z, direction), plus))).value);
    out.push_back(clock.stamp(VerificationReport::exact("easy-iii/" + tag, worst, 2.0 * bound)));
  }
  return out;
}

std::vector<VerificationReport> progress_accumulation_check(const QueryCircuit& c, const Relation& r, Element x) {
  Stopwatch clock;
  require_matching(c, r);
  require_element(c.n(), x);
  const auto trace = run_trace(c, OracleBackend::spo(c.n()));
  const auto dirs = query_directions(c);
  const double coeff = static_cast<double>(r.section(x).size()) / one_based(x);
  double linear = 0.0, squares = 0.0;
  for (std::size_t j = 0; j < trace.pre_query.size(); ++j) {
    const auto& s = trace.pre_query[j];
    const double off = apply_plus_complement(s, x).norm();
    const double zeta = zeta_terms(s, x, r, dirs[j]).total();
    linear += std::sqrt(coeff) * off + 4.0 * std::sqrt(zeta);
    squares += coeff * off * off + 16.0 * zeta;
  }
  const double q = static_cast<double>(trace.pre_query.size());
  const double cauchy = std::sqrt(2.0 * q * squares);
  const double lhs = apply_progress(trace.final_state, r, x).norm();
  const std::string tag = c.name() + "/" + r.name() + "/x=" + std::to_string(x + 1);
  return {clock.stamp(VerificationReport::exact("accumulation/" + tag, lhs, linear)),
          clock.stamp(VerificationReport::exact("accumulation-cs/" + tag, linear, cauchy))};
}

// ---------------------------------------------------------------- expectation over twirls

namespace {

// L^tau R^sigma |phi>, followed by V_X^p when `p` is given; rel = relabel(tau^{-1}, sigma).
StateVector twirled_copy(const StateVector& phi, const std::vector<std::uint32_t>& rel, const Permutation* p = nullptr) {
  const JointShape g = detail::joint_shape(phi);
  const cplx* in = phi.amplitudes().data();
  Vector out(static_cast<Eigen::Index>(phi.dim()));
  for (std::size_t w = 0; w < g.outer; ++w)
    for (std::size_t x = 0; x < g.n; ++x) {
      const std::size_t xo = p ? (*p)(static_cast<Element>(x)) : x;
      for (std::size_t y = 0; y < g.n; ++y) {
        const cplx* src = in + g.index(0, y, x, w);
        cplx* dst = out.data() + g.index(0, y, xo, w);
        for (std::size_t d = 0; d < g.db; ++d) dst[d] = src[rel[d]];
      }
    }
  return StateVector(phi.layout(), std::move(out));
}

double weighted_off_plus(const StateVector& s, std::size_t n) {
  double sum = 0.0;
  const auto& t = permutation_table(n);
  const std::size_t blocks = s.dim() / t.count();
  const cplx* a = s.amplitudes().data();
  for (Element x = 1; x < n; ++x) {
    const std::size_t stride = t.stride(x);
    double part = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const cplx* block = a + b * t.count();
      detail::for_each_group(t, x, [&](std::size_t base) {
        cplx mean = 0.0;
        for (std::size_t k = 0; k <= x; ++k) mean += block[base + k * stride];
        mean /= one_based(x);
        for (std::size_t k = 0; k <= x; ++k) part += std::norm(block[base + k * stride] - mean);
      });
    }
    sum += part / one_based(x);
  }
  return sum / static_cast<double>(n);
}

}  // namespace

double weighted_twirl_expectation(const StateVector& s) {
  const std::size_t n = detail::database_degree(s.layout());
  const auto pairs = detail::twirl_pairs(n, {});
  const auto values = detail::map_indices(pairs.size(), [&](std::size_t i) {
    const auto& p = pairs[i];
    return weighted_off_plus(twirled_copy(s, permutation_table(n).relabel(p.tau.inverse(), p.sigma)), n);
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<CrucialTerms> crucial_terms(const QueryCircuit& c, const Relation& r) {
  require_matching(c, r);
  const std::size_t n = c.n();
  if (n > kExhaustiveTwirlCeiling) throw SizeLimitError("crucial terms are enumerated for N <= 4");
  const QueryCircuit b = standard_form(c);
  const auto trace = run_trace(b, OracleBackend::spo(n));
  const auto pairs = detail::twirl_pairs(n, {});
  std::vector<CrucialTerms> out;
  for (const auto& pre : trace.pre_query) {
    // Twirls and V_X only permute database labels, so checking the untwirled state suffices.
    require_uniform_database_weights(pre);
    std::vector<double> first(pairs.size()), second(pairs.size()), third(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      const auto rel = permutation_table(n).relabel(p.tau.inverse(), p.sigma);
      const Relation rt = twirl_relation(r, p.sigma, p.tau);
      const StateVector by_sigma = twirled_copy(pre, rel, &p.sigma);
      const StateVector by_tau = twirled_copy(pre, rel, &p.tau);
      for (Element x = 0; x < n; ++x) {
        first[i] += zeta_terms_unchecked(by_sigma, x, rt, Direction::forward).third;
        const ZetaTerms inv = zeta_terms_unchecked(by_tau, x, rt, Direction::inverse);
        second[i] += inv.third;
        third[i] += inv.fourth;
      }
    }
    CrucialTerms ct;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      ct.first += first[i];
      ct.second += second[i];
      ct.third += third[i];
    }
    const double scale = 1.0 / (static_cast<double>(pairs.size()) * static_cast<double>(n));
    ct.first *= scale;
    ct.second *= scale;
    ct.third *= scale;
    out.push_back(ct);
  }
  return out;
}

std::vector<VerificationReport> progress_expectation_check(const QueryCircuit& c, const Relation& r) {
  Stopwatch clock;
  require_matching(c, r);
  const std::size_t n = c.n();
  const double nn = static_cast<double>(n);
  const double q = static_cast<double>(c.query_count());
  const double rmax = static_cast<double>(r.r_max());
  const double lhs = progress_measure(c, r, {}).mean;
  const auto trace = run_trace(standard_form(c), OracleBackend::spo(n));
  double sparsity = 0.0;
  for (const auto& pre : trace.pre_query) sparsity += weighted_twirl_expectation(pre);
  const double rhs = 384.0 * q * q * rmax * (std::log(nn) + 2.0) / (nn * nn) + 4.0 * q * rmax * sparsity;
  const std::string tag = c.name() + "/" + r.name();
  std::vector<VerificationReport> out{clock.stamp(VerificationReport::exact("hard-database/" + tag, lhs, rhs))};
  const auto terms = crucial_terms(c, r);
  const double unit = rmax / (nn * nn);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const std::string jt = tag + "/j=" + std::to_string(j + 1);
    out.push_back(clock.stamp(VerificationReport::exact("crucial-1/" + jt, terms[j].first, (std::log(nn) + 3.0) * unit)));
    out.push_back(clock.stamp(VerificationReport::exact("crucial-2/" + jt, terms[j].second, (std::log(nn) + 1.0) * unit)));
    out.push_back(clock.stamp(VerificationReport::exact("crucial-3/" + jt, terms[j].third, (std::log(nn) + 1.0) * unit)));
  }
  return out;
}

}  // namespace permlab
