#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lab_detail.hpp"
#include "permlab/errors.hpp"
#include "permlab/lemma_lab.hpp"

namespace permlab {

namespace {

BoundValue clamp(double raw) { return {raw, std::clamp(raw, 0.0, 1.0)}; }

void require_positive(std::size_t v, const char* what) {
  if (v == 0) throw std::invalid_argument(std::string(what) + " must be positive");
}

VerificationReport with_vacuity(VerificationReport r, const BoundValue& b) {
  if (b.vacuous()) r.note = "vacuous: clamped bound is 1 (raw " + std::to_string(b.raw) + ")";
  return r;
}

}  // namespace

BoundValue main_bound(std::size_t q, double n, std::size_t r_max) {
  require_positive(q, "q");
  require_positive(r_max, "r_max");
  if (!(n >= 1.0)) throw std::invalid_argument("N must be at least 1");
  const double qq = static_cast<double>(q);
  return clamp(914.0 * qq * qq * qq * static_cast<double>(r_max) * (std::log(n) + 2.0) / n);
}

BoundValue sponge_bound(std::size_t q, std::size_t n_bits, std::size_t c) {
  require_positive(q, "q");
  if (c > n_bits) throw std::invalid_argument("capacity exceeds the width");
  const double qq = static_cast<double>(q);
  const double e = static_cast<double>(std::min(c, n_bits - c));
  return clamp(914.0 * qq * qq * qq * (static_cast<double>(n_bits) + 2.0) / std::exp2(e));
}

BoundValue zero_search_bound(std::size_t q, double n, std::size_t c) {
  require_positive(q, "q");
  if (!(n > 0.0)) throw std::invalid_argument("n must be positive");
  const double qq = static_cast<double>(q);
  return clamp(1828.0 * qq * qq * qq * (n + 1.0) / std::exp2(static_cast<double>(c)));
}

QueryCircuit with_loading_query(const QueryCircuit& c) {
  QueryCircuit out = c;
  out.add_work_register({"L", c.n()});
  out.add_local({"Y", "L"}, swap_operator(c.n()), "stash Y");
  out.add_query(Direction::forward);
  out.output.include_y = true;
  out.set_name(c.name() + "+load");
  return out;
}

double search_success_concrete(const QueryCircuit& c, const Relation& r) {
  if (c.n() != r.n()) throw std::invalid_argument("circuit and relation sizes differ");
  if (c.n() > kExactCeiling) throw SizeLimitError("exact success needs N <= 8");
  const auto& t = permutation_table(c.n());
  double p = 0.0;
  for (std::size_t i = 0; i < t.count(); ++i) {
    const Permutation pi = t.perm(i);
    const auto dist = born_probabilities(run(c, OracleBackend::concrete(pi)), {"X"});
    for (Element x = 0; x < c.n(); ++x)
      if (r.contains(x, pi(x))) p += dist[x];
  }
  return p / static_cast<double>(t.count());
}

std::vector<VerificationReport> theorem_check(const QueryCircuit& c, const Relation& r) {
  Stopwatch clock;
  const std::size_t n = c.n();
  const double lhs = search_success_concrete(c, r);
  const QueryCircuit loaded = with_loading_query(c);
  if (loaded.layout(true).total_dim() > kAmplitudeBudget) throw BudgetError("joint state exceeds the amplitude budget");
  const double via_spo = detail::accepted_weight(run(loaded, OracleBackend::spo(n)), r);
  const std::size_t q = loaded.query_count();
  const BoundValue b = r.is_empty() ? BoundValue{0.0, 0.0} : main_bound(q, static_cast<double>(n), r.r_max());
  const std::string tag = c.name() + "/" + r.name();
  return {clock.stamp(with_vacuity(VerificationReport::exact("theorem/" + tag, lhs, b.clamped), b)),
          clock.stamp(VerificationReport::equality("theorem-spo-path/" + tag, lhs, via_spo, 1e-9))};
}

VerificationReport theorem_check(const AttackConfig& config) {
  Stopwatch clock;
  const AttackOutcome o = run_attack(config);
  const std::size_t width = config.n_bits;
  const std::size_t r_exp = config.kind == AttackKind::sponge ? std::max(config.c, width - config.c) : width - config.c;
  const BoundValue b = main_bound(o.queries + 1, std::exp2(static_cast<double>(width)), std::size_t{1} << r_exp);
  const std::string name = std::string("theorem/") + (config.kind == AttackKind::sponge ? "sponge" : "zero-search") +
                           "/n=" + std::to_string(width) + "/c=" + std::to_string(config.c) + "/k=" + std::to_string(config.iterations);
  VerificationReport r = o.exhaustive ? VerificationReport::exact(name, o.mean, b.clamped)
                                      : VerificationReport::monte_carlo(name, o.mean, b.clamped, o.std_error, o.trials);
  return clock.stamp(with_vacuity(std::move(r), b));
}

}  // namespace permlab
