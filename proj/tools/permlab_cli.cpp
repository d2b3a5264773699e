#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "permlab/adversary.hpp"
#include "permlab/errors.hpp"
#include "permlab/lemma_lab.hpp"
#include "permlab/perm_core.hpp"

using namespace permlab;
using nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot write '" + path + "'");
  f << text;
}

json bound_json(const BoundValue& b) { return {{"raw", b.raw}, {"clamped", b.clamped}, {"vacuous", b.vacuous()}}; }

struct Options {
  std::string suite = "all";
  std::size_t n = 4;
  std::optional<std::size_t> n_max;
  std::optional<std::uint64_t> seed;
  std::size_t samples = 2000;
  std::size_t trials = 200;
  std::string backend = "concrete";
  std::size_t q = 1;
  std::optional<std::size_t> c;
  std::size_t iterations = 1;
  std::string out;
  std::string format = "json";
  std::string kind;
  std::size_t r_max = 1;
  std::size_t target = 0;
  std::string circuit;
  std::string perm;
  std::string n_real;
  bool active = false;
};

int cmd_verify(const Options& o) {
  SuiteConfig cfg;
  cfg.suite = o.suite;
  cfg.n = o.n;
  cfg.n_max = o.n_max;
  cfg.seed = o.seed;
  cfg.samples = o.samples;
  cfg.trials = o.trials;
  const ReportCollection r = run_suite(cfg);
  emit(o.format == "csv" ? r.to_csv() : r.to_json().dump(2) + "\n", o.out);
  std::cerr << r.suite() << ": " << r.passed() << "/" << r.cases().size() << " cases pass\n";
  return r.all_pass() ? 0 : kExitFail;
}

int cmd_attack(const Options& o) {
  AttackConfig cfg;
  if (o.kind == "sponge") {
    cfg.kind = AttackKind::sponge;
  } else if (o.kind == "zero-search") {
    cfg.kind = AttackKind::zero_search;
  } else {
    throw std::invalid_argument("--kind must be sponge or zero-search");
  }
  if (!o.c) throw std::invalid_argument("--c is required");
  cfg.n_bits = o.n;
  cfg.c = *o.c;
  cfg.target = o.target;
  cfg.iterations = o.iterations;
  cfg.trials = o.trials;
  cfg.seed = o.seed.value_or(1);
  cfg.spo_backend = o.backend == "spo";
  if (cfg.spo_backend && o.n > 3) throw BudgetError("the spo backend needs 2^n <= 8");
  if (!cfg.spo_backend && cfg.trials > 0 && !o.seed) throw std::invalid_argument("sampled attacks need --seed");
  const AttackOutcome a = run_attack(cfg);
  const std::size_t q = std::max<std::size_t>(a.queries, 1);
  const BoundValue b = cfg.kind == AttackKind::sponge ? sponge_bound(q, cfg.n_bits, cfg.c)
                                                      : zero_search_bound(q, static_cast<double>(cfg.n_bits) / 2.0, cfg.c);
  json j{{"kind", o.kind},
         {"n_bits", cfg.n_bits},
         {"c", cfg.c},
         {"iterations", cfg.iterations},
         {"backend", cfg.spo_backend ? "spo" : "concrete"},
         {"queries", a.queries},
         {"trials", a.trials},
         {"exhaustive", a.exhaustive},
         {"seed", o.seed ? json(*o.seed) : json(nullptr)},
         {"success", a.mean},
         {"stderr", a.std_error},
         {"reference", a.reference},
         {"marked_reference", a.marked_reference},
         {"bound", bound_json(b)}};
  if (cfg.kind == AttackKind::sponge) j["target"] = cfg.target;
  emit(j.dump(2) + "\n", o.out);
  return 0;
}

int cmd_bound(const Options& o) {
  json j{{"kind", o.kind}, {"q", o.q}};
  if (o.kind == "main") {
    const double n = std::stod(o.n_real);
    j["n"] = n;
    j["r_max"] = o.r_max;
    j["bound"] = bound_json(main_bound(o.q, n, o.r_max));
  } else if (o.kind == "sponge" || o.kind == "zero-search") {
    if (!o.c) throw std::invalid_argument("--c is required");
    const double n = std::stod(o.n_real);
    j["n"] = n;
    j["c"] = *o.c;
    j["bound"] = bound_json(o.kind == "sponge" ? sponge_bound(o.q, static_cast<std::size_t>(n), *o.c) : zero_search_bound(o.q, n, *o.c));
  } else {
    throw std::invalid_argument("--kind must be main, sponge or zero-search");
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_factorize(const Options& o) {
  const Permutation p = Permutation::parse(o.perm);
  const auto f = monotone_factorize(p);
  std::cout << f.str() << "\n";
  std::cout << "factors:";
  bool any = false;
  for (std::size_t k = f.size(); k-- > 0;)
    if (f[k] != k) {
      std::cout << " <" << k + 1 << " " << f[k] + 1 << ">";
      any = true;
    }
  if (!any) std::cout << " (identity)";
  std::cout << "\ndistance: " << cayley_distance(f) << "\n";
  if (o.active) {
    for (Element x = 0; x < p.size(); ++x) {
      std::cout << "A(" << x + 1 << "):";
      for (Element k : active_set(f, x).members) std::cout << " " << k + 1;
      std::cout << "   Ainv(" << x + 1 << "):";
      for (Element k : inverse_active_set(f, x).members) std::cout << " " << k + 1;
      std::cout << "\n";
    }
  }
  return 0;
}

int cmd_run(const Options& o) {
  const QueryCircuit c = load_circuit(o.circuit);
  json j{{"circuit", c.name()}, {"n", c.n()}, {"queries", c.query_count()}, {"backend", o.backend}};
  std::vector<double> dist;
  if (o.backend == "spo") {
    dist = output_distribution(run(c, OracleBackend::spo(c.n())), c.output);
  } else if (!o.perm.empty()) {
    const Permutation pi = Permutation::parse(o.perm);
    if (pi.size() != c.n()) throw std::invalid_argument("--perm has the wrong size");
    j["perm"] = pi.str();
    dist = output_distribution(run(c, OracleBackend::concrete(pi)), c.output);
  } else {
    if (c.n() > kExactCeiling) throw SizeLimitError("averaging over S_N needs N <= 8");
    const auto& t = permutation_table(c.n());
    for (std::size_t i = 0; i < t.count(); ++i) {
      const auto d = output_distribution(run(c, OracleBackend::concrete(t.perm(i))), c.output);
      if (dist.empty()) dist.assign(d.size(), 0.0);
      for (std::size_t k = 0; k < d.size(); ++k) dist[k] += d[k] / static_cast<double>(t.count());
    }
  }
  j["output"] = c.output.include_y ? "XY" : "X";
  j["distribution"] = dist;
  emit(j.dump(2) + "\n", o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permutation oracle lab: verification suites, attacks and bounds"};
  app.require_subcommand(1);
  Options o;

  auto* verify = app.add_subcommand("verify", "Run a verification suite and write its report");
  verify->add_option("--suite", o.suite, "Suite name")->check(CLI::IsMember(suite_names()));
  verify->add_option("--n", o.n, "N (or the lower end of a range)")->check(CLI::Range(1, 8));
  verify->add_option("--n-max", o.n_max, "Upper end of the N range")->check(CLI::Range(1, 8));
  verify->add_option("--seed", o.seed, "Seed for sampled paths");
  verify->add_option("--samples", o.samples, "Twirl samples for N > 4");
  verify->add_option("--trials", o.trials, "Trials for sampled attacks");
  verify->add_option("--out", o.out, "Report path (stdout by default)");
  verify->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* attack = app.add_subcommand("attack", "Run a Grover attack on a random permutation");
  attack->add_option("--kind", o.kind, "sponge or zero-search")->required()->check(CLI::IsMember({"sponge", "zero-search"}));
  attack->add_option("--n", o.n, "Width in bits")->check(CLI::Range(1, 16));
  attack->add_option("--c", o.c, "Capacity bits")->required();
  attack->add_option("--iterations", o.iterations, "Grover iterations");
  attack->add_option("--target", o.target, "Sponge output prefix");
  attack->add_option("--backend", o.backend, "concrete or spo")->check(CLI::IsMember({"concrete", "spo"}));
  attack->add_option("--trials", o.trials, "Sampled permutations (0 enumerates S_N)");
  attack->add_option("--seed", o.seed, "Sampling seed");
  attack->add_option("--out", o.out, "Report path (stdout by default)");

  auto* bound = app.add_subcommand("bound", "Evaluate a headline bound");
  bound->add_option("--kind", o.kind, "main, sponge or zero-search")->required()->check(CLI::IsMember({"main", "sponge", "zero-search"}));
  bound->add_option("--q", o.q, "Query count")->check(CLI::PositiveNumber);
  bound->add_option("--n", o.n_real, "N for main; bits for sponge; half-width for zero-search")->required();
  bound->add_option("--c", o.c, "Capacity bits");
  bound->add_option("--r-max", o.r_max, "Largest relation section")->check(CLI::PositiveNumber);

  auto* factorize = app.add_subcommand("factorize", "Monotone transposition factorization of a permutation");
  factorize->add_option("perm", o.perm, "One-line notation, 1-based, e.g. \"2 3 1\"")->required();
  factorize->add_flag("--active", o.active, "Also print the active sets");

  auto* run_cmd = app.add_subcommand("run", "Run a circuit file and print its output distribution");
  run_cmd->add_option("--circuit", o.circuit, "Circuit file")->required();
  run_cmd->add_option("--backend", o.backend, "concrete or spo")->check(CLI::IsMember({"concrete", "spo"}));
  run_cmd->add_option("--perm", o.perm, "Fixed permutation for the concrete backend (default: average over S_N)");
  run_cmd->add_option("--out", o.out, "Output path (stdout by default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(o);
    if (*attack) return cmd_attack(o);
    if (*bound) return cmd_bound(o);
    if (*factorize) return cmd_factorize(o);
    if (*run_cmd) return cmd_run(o);
  } catch (const SizeLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
