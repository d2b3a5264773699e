#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "permlab/adversary.hpp"
#include "permlab/relation.hpp"
#include "permlab/report.hpp"

namespace permlab {

// ------------------------------------------------------------ database operators
// All operators below act on D1..DN (dims 1..N); x is 0-based, so D_x has dimension x+1.

// Pi^{R,x} = sum over pi with pi(x) in R_x of |pi><pi|
LinearOperator relation_projector(const Relation& r, Element x);
// |+_x><+_x| on D_x, identity on the other database registers.
LinearOperator plus_projector(std::size_t n, Element x);
// E^{R,x} = Pi^{R,x} (I - |+_x><+_x|)
LinearOperator progress_operator(const Relation& r, Element x);

// The same maps applied to the database of a canonical joint state.
Vector apply_plus_complement(const StateVector& s, Element x);
Vector apply_progress(const StateVector& s, const Relation& r, Element x);

enum class NormRoute { dense, group_reduction };

// || Pi_Y |+_x>_{D_x} ||, with Pi_Y the projector onto pi(x) in Y.
double help_norm(std::size_t n, Element x, const std::vector<Element>& y_set, NormRoute route = NormRoute::group_reduction);
// sqrt(|Y| / x) with x 1-based.
double help_bound(Element x, std::size_t y_count);

// ------------------------------------------------------------ twirl averages

// Exhaustive averaging over S_N x S_N when `seed` is empty, otherwise `samples` seeded draws
// stratified over x.
struct TwirlSampling {
  std::optional<std::uint64_t> seed;
  std::size_t samples = 2000;
  bool exhaustive() const { return !seed.has_value(); }
};

// Largest N for exhaustive twirl averages.
inline constexpr std::size_t kExhaustiveTwirlCeiling = 4;

struct ExperimentProbabilities {
  double p_i = 0.0;
  double p_ii = 0.0;
  double p_ii_std_error = 0.0;
  std::size_t samples = 0;
  bool exhaustive = true;
};

// The circuit must output (x, y).
ExperimentProbabilities experiment_probabilities(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode = {});
// Several relations against one run; the same twirl pairs serve every relation.
std::vector<ExperimentProbabilities> experiment_probabilities(const QueryCircuit& c, const std::vector<Relation>& rs,
                                                              const TwirlSampling& mode = {});
// p_i from the concrete backend, enumerating S_N.
double acceptance_probability_concrete(const QueryCircuit& c, const Relation& r);

double fundamental_rhs_constant(std::size_t n);  // sqrt((ln N + 1)/N)
VerificationReport fundamental_check(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode = {});
std::vector<VerificationReport> fundamental_check(const QueryCircuit& c, const std::vector<Relation>& rs, const TwirlSampling& mode = {});

// E_{sigma,tau} sum_{(x,y) in R} sum_{pi: tau^{-1} pi sigma (x) = y} ||<pi| (I - |+><+|_{D_sigma(x)}) |phi^{sigma,tau}>||^2
Estimate p2_upper_bound(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode = {});
// E_{x,sigma,tau} ||E^{R^{sigma,tau},x} |phi^{sigma,tau}>||^2, from explicitly twirled states and relations.
Estimate progress_measure(const QueryCircuit& c, const Relation& r, const TwirlSampling& mode = {});

// ------------------------------------------------------------ per-query lemmas

struct ZetaTerms {
  double weighted_slice = 0.0;  // |R_x|/x ||phi_x||^2
  double constant = 0.0;        // |R_x|/(x^2 N)
  double third = 0.0;
  double fourth = 0.0;          // inverse direction only
  double total() const { return weighted_slice + constant + third + fourth; }
};

// Throws PreconditionError unless every ||<pi|phi>||^2 equals 1/N! within 1e-9.
void require_uniform_database_weights(const StateVector& s, double tolerance = 1e-9);
ZetaTerms zeta_terms(const StateVector& s, Element x, const Relation& r, Direction direction);

VerificationReport query_step_check(const StateVector& s, Element x, const Relation& r, Direction direction);

// Operator-norm parts (i) and (iii) of the single-query lemma, on XYD and YD respectively.
std::vector<VerificationReport> easy_operator_check(const Relation& r, Element x, Direction direction);

// Both accumulation inequalities for a plain SPO run, plus the dominance of the first by the second.
std::vector<VerificationReport> progress_accumulation_check(const QueryCircuit& c, const Relation& r, Element x);

// Expectation bound over x, sigma, tau; followed by the three crucial-term bounds for every j.
std::vector<VerificationReport> progress_expectation_check(const QueryCircuit& c, const Relation& r);

struct CrucialTerms {
  double first = 0.0;
  double second = 0.0;
  double third = 0.0;
};
// The three expectations for the pre-query state of the j-th query (0-based) of standard_form(c).
std::vector<CrucialTerms> crucial_terms(const QueryCircuit& c, const Relation& r);

// ------------------------------------------------------------ Gamma

double harmonic(std::size_t n, unsigned order = 1);

enum class GammaMethod { closed_form, brute_force };
LinearOperator gamma_operator(std::size_t n, GammaMethod method);
// Average of R^gamma (right) or L^gamma (left) over all l-cycles gamma, l in {2, 3}.
LinearOperator cycle_average(std::size_t n, unsigned l, TwirlSide side = TwirlSide::right);

// <phi| Gamma_D |phi> for a canonical joint state.
double gamma_expectation(const StateVector& s);
// E_x (1/x) E_{sigma,tau} ||(I - |+_x><+_x|) L^tau R^sigma |phi>||^2 by explicit twirling (N <= 4).
double weighted_twirl_expectation(const StateVector& s);

enum class CommutatorRoute { dense_slice, fourier_blocks };
// ||[Gamma_D, O^{SPO,x}_{YD}]|| for one slice.
double commutator_slice_norm(std::size_t n, Element x, Direction direction, CommutatorRoute route);
double commutator_bound(std::size_t n);  // 6(ln N + 1)/N^2
std::vector<VerificationReport> commutator_growth_check(std::size_t n);

std::vector<VerificationReport> sparsity_trajectory_check(const QueryCircuit& c);

// ------------------------------------------------------------ headline bounds

struct BoundValue {
  double raw = 0.0;
  double clamped = 0.0;
  bool vacuous() const { return clamped >= 1.0; }
};
BoundValue main_bound(std::size_t q, double n, std::size_t r_max);
BoundValue sponge_bound(std::size_t q, std::size_t n_bits, std::size_t c);
// n is the half-width: inputs and outputs have 2n bits.
BoundValue zero_search_bound(std::size_t q, double n, std::size_t c);

// A followed by a query loading pi(x) into Y; Y is first moved into a fresh register.
QueryCircuit with_loading_query(const QueryCircuit& c);
// Pr[(x, pi(x)) in R] for a circuit outputting x.
double search_success_concrete(const QueryCircuit& c, const Relation& r);

// Bound check with q = queries + 1, and agreement of the concrete and SPO evaluations of the lhs.
std::vector<VerificationReport> theorem_check(const QueryCircuit& c, const Relation& r);
// Sampled variant for the attack circuits.
VerificationReport theorem_check(const AttackConfig& config);

// ------------------------------------------------------------ suites

struct AdversaryCase {
  QueryCircuit circuit;  // outputs (x, y)
  Relation relation;
  std::string name() const { return circuit.name() + "/" + relation.name(); }
};
// Probes, guesses, random circuits and a Grover circuit, paired with several relations.
std::vector<AdversaryCase> adversary_suite(std::size_t n, std::uint64_t seed);

struct SuiteConfig {
  std::string suite = "all";
  std::size_t n = 4;
  std::optional<std::size_t> n_max;
  std::optional<std::uint64_t> seed;
  std::size_t samples = 2000;
  std::size_t trials = 200;
};

const std::vector<std::string>& suite_names();
ReportCollection run_suite(const SuiteConfig& config);

}  // namespace permlab
