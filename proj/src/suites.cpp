#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

#include "lab_detail.hpp"
#include "permlab/errors.hpp"
#include "permlab/lemma_lab.hpp"

namespace permlab {

namespace {

constexpr std::uint64_t kDefaultCircuitSeed = 1;

std::size_t log2_exact(std::size_t n) {
  std::size_t b = 0;
  while ((std::size_t{1} << b) < n) ++b;
  return b;
}

void require_power_of_two(std::size_t n, std::size_t ceiling, const char* suite) {
  if (!is_power_of_two(n) || n < 2 || n > ceiling)
    throw SizeLimitError(std::string(suite) + " runs for N in {2, 4" + (ceiling >= 8 ? ", 8}" : "}"));
}

std::string tag_n(std::size_t n) { return "N=" + std::to_string(n); }

std::vector<QueryCircuit> unique_circuits(const std::vector<AdversaryCase>& cases) {
  std::vector<QueryCircuit> out;
  for (const auto& c : cases)
    if (out.empty() || out.back().name() != c.circuit.name()) out.push_back(c.circuit);
  return out;
}

// ---------------------------------------------------------------- perm_core suites

std::vector<VerificationReport> factorization_suite(std::size_t n) {
  if (n < 1 || n > kExactCeiling) throw SizeLimitError("factorization runs for N <= 8");
  Stopwatch clock;
  const std::uint64_t count = factorial(n);
  std::size_t round_trip = 0, tuple_trip = 0, distance = 0;
  std::vector<char> seen(count, 0);
  const auto& t = permutation_table(n);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto f = MonotoneFactorization::from_index(n, i);
    const Permutation p = compose_from_factors(f);
    if (!(monotone_factorize(p) == f)) ++tuple_trip;
    if (!(compose_from_factors(monotone_factorize(t.perm(i))) == t.perm(i))) ++round_trip;
    const std::size_t idx = t.index_of(p);
    seen[idx] = 1;
    if (cayley_distance(f) != n - p.cycle_count()) ++distance;
  }
  const auto hit = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1));
  const std::string tag = tag_n(n);
  return {clock.stamp(VerificationReport::equality("compose-factorize/" + tag, static_cast<double>(round_trip), 0.0, 0.0)),
          clock.stamp(VerificationReport::equality("factorize-compose/" + tag, static_cast<double>(tuple_trip), 0.0, 0.0)),
          clock.stamp(VerificationReport::equality("bijection/" + tag, static_cast<double>(hit), static_cast<double>(count), 0.0)),
          clock.stamp(VerificationReport::equality("cayley-distance/" + tag, static_cast<double>(distance), 0.0, 0.0))};
}

std::vector<VerificationReport> active_sets_suite(std::size_t n) {
  if (n < 1 || n > kExactCeiling) throw SizeLimitError("active-sets runs for N <= 8");
  const std::string tag = tag_n(n);
  std::vector<VerificationReport> out;
  Stopwatch clock;
  const auto& t = permutation_table(n);
  std::size_t fwd_mismatch = 0, inv_mismatch = 0;
  // hits[x][k] = #{pi : k in A(pi, x)}
  std::vector<std::vector<std::size_t>> hits(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < t.count(); ++i) {
    const auto f = MonotoneFactorization::from_index(n, i);
    const Permutation p = t.perm(i);
    for (Element x = 0; x < n; ++x) {
      if (apply_via_active(f, x, ActiveKind::forward) != p(x)) ++fwd_mismatch;
      if (apply_via_active(f, x, ActiveKind::inverse) != p.inverse()(x)) ++inv_mismatch;
      for (Element k : active_set(f, x).members) ++hits[x][k];
    }
  }
  out.push_back(clock.stamp(VerificationReport::equality("apply-via-active/fwd/" + tag, static_cast<double>(fwd_mismatch), 0.0, 0.0)));
  out.push_back(clock.stamp(VerificationReport::equality("apply-via-active/inv/" + tag, static_cast<double>(inv_mismatch), 0.0, 0.0)));
  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t k = 0; k < n; ++k) {
      const double expected = k < x ? 0.0 : (k == x ? 1.0 : 1.0 / static_cast<double>(k + 1));
      worst = std::max(worst, std::abs(static_cast<double>(hits[x][k]) / static_cast<double>(t.count()) - expected));
    }
  out.push_back(clock.stamp(VerificationReport::equality("active-membership/" + tag, worst, 0.0, 1e-12)));

  const double nn = static_cast<double>(n);
  for (Element a = 0; a < n; ++a) {
    const std::string at = tag + "/arg=" + std::to_string(a + 1);
    const double fwd = expected_active_size(n, a, ActiveKind::forward, ExpectationMethod::exact).mean;
    out.push_back(clock.stamp(VerificationReport::exact("active-expectation/" + at, fwd, 1.0 + std::log(nn / (a + 1.0)))));
    const double inv = expected_active_size(n, a, ActiveKind::inverse, ExpectationMethod::exact).mean;
    out.push_back(clock.stamp(VerificationReport::exact("inverse-active-expectation/" + at, inv, 1.0 + 2.0 * a / nn)));
    out.push_back(clock.stamp(VerificationReport::equality("inverse-recurrence/" + at, inverse_active_expectation(n, a + 1), inv, 1e-12)));
  }
  return out;
}

// ---------------------------------------------------------------- oracle suites

std::vector<VerificationReport> spo_equivalence_suite(std::size_t n, std::uint64_t seed) {
  require_power_of_two(n, 4, "spo-equivalence");
  std::vector<VerificationReport> out;
  std::mt19937_64 rng(seed);
  const std::size_t circuits = n == 2 ? 8 : 20;
  for (std::size_t i = 0; i < circuits; ++i) {
    Stopwatch clock;
    const std::size_t q = 1 + i % 3;
    const std::size_t work = 1 + i % 4;
    const QueryCircuit c = random_circuit(seed * 1000 + i, q, work, n);
    const Twirl tw{sample_uniform(n, rng), sample_uniform(n, rng)};
    const auto concrete = concrete_ensemble(c);
    const std::string tag = c.name() + "/" + tag_n(n);
    out.push_back(clock.stamp(VerificationReport::exact("spo-vs-concrete/" + tag, trace_distance(concrete, spo_ensemble(c)), 0.0)));
    out.push_back(clock.stamp(VerificationReport::exact("tspo-vs-concrete/" + tag, trace_distance(concrete, spo_ensemble(c, tw)), 0.0)));

    const QueryCircuit b = standard_form(c);
    out.push_back(clock.stamp(VerificationReport::equality("standard-form-queries/" + tag, static_cast<double>(b.query_count()),
                                                           2.0 * static_cast<double>(c.query_count()), 0.0)));
    const auto b_concrete = concrete_ensemble(b);
    out.push_back(clock.stamp(VerificationReport::exact("standard-form-spo/" + tag, trace_distance(b_concrete, spo_ensemble(b)), 0.0)));
    out.push_back(clock.stamp(VerificationReport::exact("standard-form-tspo/" + tag, trace_distance(b_concrete, spo_ensemble(b, tw)), 0.0)));
    const StateVector via_tspo = run(b, OracleBackend::tspo(tw.sigma, tw.tau));
    const StateVector via_spo = run(b, OracleBackend::spo_conjugated(tw.sigma, tw.tau));
    out.push_back(clock.stamp(VerificationReport::exact("standard-form-conjugated/" + tag,
                                                        (via_tspo.amplitudes() - via_spo.amplitudes()).norm(), 0.0, 1e-12)));
    const auto pa = output_distribution(run(c, OracleBackend::concrete(tw.sigma)), c.output);
    const auto pb = output_distribution(run(b, OracleBackend::concrete(tw.sigma)), b.output);
    double diff = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) diff = std::max(diff, std::abs(pa[k] - pb[k]));
    out.push_back(clock.stamp(VerificationReport::exact("standard-form-output/" + tag, diff, 0.0, 1e-12)));
  }
  return out;
}

std::vector<VerificationReport> twirl_suite(std::size_t n, std::uint64_t seed) {
  require_power_of_two(n, 4, "twirl");
  std::vector<VerificationReport> out;
  const auto& t = permutation_table(n);
  const QueryCircuit c = random_circuit(seed, 2, 2, n);
  const StateVector spo_final = run(c, OracleBackend::spo(n));
  const StateVector init = spo_init(n);
  double op_gap = 0.0, state_gap = 0.0, invariance = 0.0;
  Stopwatch clock;
  for (std::size_t si = 0; si < t.count(); ++si)
    for (std::size_t ti = 0; ti < t.count(); ++ti) {
      const Permutation sigma = t.perm(si), tau = t.perm(ti);
      // T = L^{tau^-1} R^{sigma^-1} turns |pi> into |tau^-1 pi sigma>; TSPO = T^dag SPO T.
      const auto to = compose(twirl_operator(n, TwirlSide::left, tau.inverse(), true),
                              twirl_operator(n, TwirlSide::right, sigma.inverse(), true));
      for (Direction dir : {Direction::forward, Direction::inverse}) {
        const Matrix lhs = tspo_query_operator(n, dir, sigma, tau).to_dense();
        const Matrix rhs = compose(to.dagger(), compose(spo_query_operator(n, dir), to)).to_dense();
        op_gap = std::max(op_gap, (lhs - rhs).cwiseAbs().maxCoeff());
      }
      const StateVector tspo_final = run(c, OracleBackend::tspo(sigma, tau));
      const StateVector twisted = twirl(twirl(spo_final, TwirlSide::right, sigma), TwirlSide::left, tau);
      state_gap = std::max(state_gap, (tspo_final.amplitudes() - twisted.amplitudes()).cwiseAbs().maxCoeff());
      const StateVector moved = twirl(twirl(init, TwirlSide::right, sigma), TwirlSide::left, tau);
      invariance = std::max(invariance, (moved.amplitudes() - init.amplitudes()).cwiseAbs().maxCoeff());
    }
  const std::string tag = tag_n(n);
  out.push_back(clock.stamp(VerificationReport::exact("tspo-operator-identity/" + tag, op_gap, 0.0, 1e-12)));
  out.push_back(clock.stamp(VerificationReport::exact("twisted-output-state/" + tag, state_gap, 0.0, 1e-12)));
  out.push_back(clock.stamp(VerificationReport::exact("initial-twirl-invariance/" + tag, invariance, 0.0, 1e-15)));
  return out;
}

// ---------------------------------------------------------------- lemma suites

std::vector<VerificationReport> fundamental_suite(std::size_t n, const SuiteConfig& config) {
  require_power_of_two(n, 8, "fundamental");
  TwirlSampling mode;
  if (n > kExhaustiveTwirlCeiling) {
    if (!config.seed) throw std::invalid_argument("N > 4 samples twirls; pass --seed");
    mode.seed = config.seed;
    mode.samples = config.samples;
  }
  const auto cases = adversary_suite(n, config.seed.value_or(kDefaultCircuitSeed));
  std::vector<VerificationReport> out;
  for (std::size_t i = 0; i < cases.size();) {
    std::vector<Relation> rs;
    std::size_t j = i;
    for (; j < cases.size() && cases[j].circuit.name() == cases[i].circuit.name(); ++j) rs.push_back(cases[j].relation);
    const auto reports = fundamental_check(cases[i].circuit, rs, mode);
    out.insert(out.end(), reports.begin(), reports.end());
    i = j;
  }
  return out;
}

std::vector<VerificationReport> help_norm_suite(std::size_t n) {
  if (n < 1 || n > 5) throw SizeLimitError("help-norm runs for N <= 5");
  std::vector<VerificationReport> out;
  const std::string tag = tag_n(n);
  Stopwatch clock;
  double worst_slack = 1.0, route_gap = 0.0;
  for (Element x = 0; x < n; ++x)
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::vector<Element> ys;
      for (Element y = 0; y < n; ++y)
        if (mask >> y & 1) ys.push_back(y);
      const double group = help_norm(n, x, ys, NormRoute::group_reduction);
      const double dense = help_norm(n, x, ys, NormRoute::dense);
      route_gap = std::max(route_gap, std::abs(group - dense));
      worst_slack = std::min(worst_slack, help_bound(x, ys.size()) - std::max(group, dense));
    }
  out.push_back(clock.stamp(VerificationReport::exact("help-bound/" + tag, -worst_slack, 0.0)));
  out.push_back(clock.stamp(VerificationReport::exact("help-routes/" + tag, route_gap, 0.0, 1e-9)));
  if (n == 2) {
    const double v = help_norm(2, 1, {0}, NormRoute::dense);
    out.push_back(clock.stamp(VerificationReport::equality("help-equality-case/" + tag, v, help_bound(1, 1), 1e-12)));
  }
  return out;
}

std::vector<VerificationReport> progress_suite(std::size_t n, const SuiteConfig& config) {
  require_power_of_two(n, kExhaustiveTwirlCeiling, "progress");
  const auto cases = adversary_suite(n, config.seed.value_or(kDefaultCircuitSeed));
  std::vector<VerificationReport> out;
  std::map<std::string, bool> easy_done;
  for (const auto& kase : cases) {
    const auto& c = kase.circuit;
    const auto& r = kase.relation;
    const std::string tag = kase.name();
    {
      Stopwatch clock;
      const Estimate p2 = p2_upper_bound(c, r);
      const Estimate pm = progress_measure(c, r);
      const double p_ii = experiment_probabilities(c, r).p_ii;
      out.push_back(clock.stamp(VerificationReport::equality("progress-identity/" + tag, static_cast<double>(n) * pm.mean, p2.mean, 1e-10)));
      out.push_back(clock.stamp(VerificationReport::exact("progress-dominates/" + tag, p_ii, p2.mean)));
    }
    const auto trace = run_trace(c, OracleBackend::spo(n));
    std::size_t j = 0;
    for (const auto& step : c.steps()) {
      const auto* q = std::get_if<QueryStep>(&step);
      if (!q) continue;
      for (Element x = 0; x < n; ++x) {
        auto rep = query_step_check(trace.pre_query[j], x, r, q->direction);
        rep.name += "/" + tag + "/j=" + std::to_string(j + 1);
        out.push_back(std::move(rep));
      }
      ++j;
    }
    for (Element x = 0; x < n; ++x) {
      const auto acc = progress_accumulation_check(c, r, x);
      out.insert(out.end(), acc.begin(), acc.end());
    }
    if (!easy_done[r.name()]) {
      easy_done[r.name()] = true;
      for (Element x = 0; x < n; ++x)
        for (Direction dir : {Direction::forward, Direction::inverse}) {
          const auto e = easy_operator_check(r, x, dir);
          out.insert(out.end(), e.begin(), e.end());
        }
    }
    const auto hard = progress_expectation_check(c, r);
    out.insert(out.end(), hard.begin(), hard.end());
  }
  return out;
}

std::vector<VerificationReport> gamma_suite(std::size_t n) {
  if (n < 1 || n > 6) throw SizeLimitError("gamma runs for N <= 6");
  std::vector<VerificationReport> out;
  const std::string tag = tag_n(n);
  Stopwatch clock;
  const Matrix closed = gamma_operator(n, GammaMethod::closed_form).to_dense();
  if (n <= 5) {
    const Matrix brute = gamma_operator(n, GammaMethod::brute_force).to_dense();
    out.push_back(clock.stamp(VerificationReport::exact("gamma-closed-vs-brute/" + tag, (closed - brute).cwiseAbs().maxCoeff(), 0.0, 1e-10)));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(closed, Eigen::EigenvaluesOnly);
  const double nn = static_cast<double>(n);
  out.push_back(clock.stamp(VerificationReport::exact("gamma-psd/" + tag, -eig.eigenvalues().minCoeff(), 0.0)));
  out.push_back(clock.stamp(VerificationReport::exact("gamma-norm/" + tag, eig.eigenvalues().maxCoeff(), (std::log(nn) + 1.0) / nn)));
  if (n == 2) {
    out.push_back(clock.stamp(VerificationReport::equality("gamma-spectrum-min/" + tag, eig.eigenvalues().minCoeff(), 0.0, 1e-12)));
    out.push_back(clock.stamp(VerificationReport::equality("gamma-spectrum-max/" + tag, eig.eigenvalues().maxCoeff(), 0.25, 1e-12)));
  }
  for (unsigned l : {2u, 3u}) {
    if (n < l) continue;
    const Matrix right = cycle_average(n, l, TwirlSide::right).to_dense();
    const Matrix left = cycle_average(n, l, TwirlSide::left).to_dense();
    const std::string lt = "W" + std::to_string(l) + "/" + tag;
    out.push_back(clock.stamp(VerificationReport::exact("cycle-left-right/" + lt, (right - left).cwiseAbs().maxCoeff(), 0.0, 1e-12)));
    out.push_back(clock.stamp(VerificationReport::exact("cycle-symmetric/" + lt, (right - right.adjoint()).cwiseAbs().maxCoeff(), 0.0, 1e-12)));
    Eigen::SelfAdjointEigenSolver<Matrix> w(right, Eigen::EigenvaluesOnly);
    out.push_back(clock.stamp(VerificationReport::exact("cycle-norm/" + lt, w.eigenvalues().cwiseAbs().maxCoeff(), 1.0)));
  }
  return out;
}

std::vector<VerificationReport> sparsity_suite(std::size_t n, const SuiteConfig& config) {
  require_power_of_two(n, 8, "sparsity");
  std::vector<VerificationReport> out;
  for (const auto& c : unique_circuits(adversary_suite(n, config.seed.value_or(kDefaultCircuitSeed)))) {
    const auto rs = sparsity_trajectory_check(c);
    out.insert(out.end(), rs.begin(), rs.end());
  }
  return out;
}

using SuiteFn = std::function<std::vector<VerificationReport>(std::size_t, const SuiteConfig&)>;

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> table{
      {"factorization", [](std::size_t n, const SuiteConfig&) { return factorization_suite(n); }},
      {"active-sets", [](std::size_t n, const SuiteConfig&) { return active_sets_suite(n); }},
      {"spo-equivalence",
       [](std::size_t n, const SuiteConfig& c) { return spo_equivalence_suite(n, c.seed.value_or(kDefaultCircuitSeed)); }},
      {"twirl", [](std::size_t n, const SuiteConfig& c) { return twirl_suite(n, c.seed.value_or(kDefaultCircuitSeed)); }},
      {"fundamental", fundamental_suite},
      {"help-norm", [](std::size_t n, const SuiteConfig&) { return help_norm_suite(n); }},
      {"progress", progress_suite},
      {"gamma", [](std::size_t n, const SuiteConfig&) { return gamma_suite(n); }},
      {"commutator", [](std::size_t n, const SuiteConfig&) { return commutator_growth_check(n); }},
      {"sparsity", sparsity_suite},
  };
  return table;
}

}  // namespace

std::vector<AdversaryCase> adversary_suite(std::size_t n, std::uint64_t seed) {
  require_power_of_two(n, 8, "the adversary suite");
  const bool large = n > kExhaustiveTwirlCeiling;
  const std::size_t bits = log2_exact(n);
  std::mt19937_64 rng(seed);

  std::vector<Relation> relations{Relation::full(n)};
  relations.back().set_name("full");
  if (bits >= 2) relations.push_back(Relation::sponge(bits, 1, 0));
  relations.push_back(Relation::random(n, 0.3, rng));
  relations.back().set_name("random");
  if (!large) {
    relations.push_back(Relation::graph_of(sample_uniform(n, rng)));
    relations.back().set_name("graph");
    relations.push_back(Relation::from_pairs(n, {{0, 0}}, "singleton"));
  }

  std::vector<QueryCircuit> circuits;
  std::vector<Element> probe_points;
  if (large) {
    probe_points = {0, static_cast<Element>(n / 2), static_cast<Element>(n - 1)};
  } else {
    for (Element x = 0; x < n; ++x) probe_points.push_back(x);
  }
  for (Direction dir : {Direction::forward, Direction::inverse})
    for (Element x : probe_points) circuits.push_back(classical_probe(n, x, dir));
  circuits.push_back(fixed_guess(n, 0, 0));
  const std::size_t max_q = large ? 2 : 3;
  for (std::size_t q = 1; q <= max_q; ++q) circuits.push_back(random_circuit(seed * 7919 + q, q, 2, n));
  if (bits >= 2 && large) {
    // Y is clean after each Grover iteration, so a plain query loads pi(x) without a stash register.
    QueryCircuit g = grover_preimage(bits, 1, 0, 1);
    g.add_query(Direction::forward);
    g.output.include_y = true;
    g.set_name(g.name() + "+query");
    circuits.push_back(g);
  } else if (bits >= 2) {
    circuits.push_back(with_loading_query(grover_preimage(bits, 1, 0, 1)));
  }

  std::vector<AdversaryCase> out;
  for (const auto& c : circuits)
    for (const auto& r : relations) out.push_back({c, r});
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"factorization", "active-sets", "spo-equivalence", "twirl", "fundamental",
                                              "help-norm", "progress", "gamma", "commutator", "sparsity", "all"};
  return names;
}

ReportCollection run_suite(const SuiteConfig& config) {
  const auto& table = registry();
  if (config.suite != "all" && !table.count(config.suite)) throw std::invalid_argument("unknown suite '" + config.suite + "'");
  const std::size_t n_max = config.n_max.value_or(config.n);
  if (n_max < config.n) throw std::invalid_argument("--n-max is below --n");

  nlohmann::json cfg{{"suite", config.suite}, {"n", config.n}, {"n_max", n_max}, {"samples", config.samples},
                     {"trials", config.trials}, {"circuit_seed", config.seed.value_or(kDefaultCircuitSeed)}};
  nlohmann::json skipped = nlohmann::json::array();
  ReportCollection out(config.suite, config.n, config.seed, nlohmann::json::object());
  // Sizes a suite does not serve are skipped inside a range or under "all"; a lone size must fit.
  const bool tolerant = config.suite == "all" || n_max > config.n;
  std::size_t ran = 0;
  for (std::size_t n = config.n; n <= n_max; ++n) {
    for (const auto& name : suite_names()) {
      if (name == "all" || (config.suite != "all" && name != config.suite)) continue;
      try {
        out.append(table.at(name)(n, config));
        ++ran;
      } catch (const SizeLimitError& e) {
        if (!tolerant) throw;
        skipped.push_back({{"suite", name}, {"n", n}, {"reason", e.what()}});
      }
    }
  }
  if (ran == 0) throw SizeLimitError("no requested suite applies to the requested sizes");
  cfg["skipped"] = skipped;
  ReportCollection result(config.suite, config.n, config.seed, cfg);
  result.merge(out);
  return result;
}

}  // namespace permlab
