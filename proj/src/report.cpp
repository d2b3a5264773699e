#include "permlab/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace permlab {

VerificationReport VerificationReport::exact(std::string name, double lhs, double rhs, double tolerance) {
  VerificationReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.tolerance = tolerance;
  r.pass = std::isfinite(r.slack) ? r.slack >= -tolerance : (std::isinf(rhs) && rhs > 0);
  return r;
}

VerificationReport VerificationReport::monte_carlo(std::string name, double lhs, double rhs, double std_error,
                                                   std::size_t samples) {
  VerificationReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.method = Method::monte_carlo;
  r.std_error = std_error;
  r.samples = samples;
  r.tolerance = kSigmaMultiplier * std_error;
  r.pass = r.slack >= -r.tolerance;
  return r;
}

VerificationReport VerificationReport::equality(std::string name, double lhs, double rhs, double tolerance) {
  VerificationReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = tolerance - std::abs(lhs - rhs);
  r.tolerance = tolerance;
  r.pass = r.slack >= 0.0;
  r.note = "equality";
  return r;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["slack"] = slack;
  j["pass"] = pass;
  j["method"] = method == Method::exact ? "exact" : "monte_carlo";
  if (method == Method::monte_carlo) {
    j["stderr"] = std_error;
    j["samples"] = samples;
  }
  j["tolerance"] = tolerance;
  if (!note.empty()) j["note"] = note;
  j["runtime_ms"] = runtime_ms;
  return j;
}

double Stopwatch::elapsed_ms() const {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
}

VerificationReport Stopwatch::stamp(VerificationReport r) const {
  r.runtime_ms = elapsed_ms();
  return r;
}

ReportCollection::ReportCollection(std::string suite, std::size_t n, std::optional<std::uint64_t> seed, nlohmann::json config)
    : suite_(std::move(suite)), n_(n), seed_(seed), config_(std::move(config)) {}

void ReportCollection::append(const std::vector<VerificationReport>& rs) { cases_.insert(cases_.end(), rs.begin(), rs.end()); }

void ReportCollection::merge(const ReportCollection& other) { append(other.cases_); }

std::size_t ReportCollection::passed() const {
  std::size_t k = 0;
  for (const auto& c : cases_) k += c.pass ? 1 : 0;
  return k;
}

nlohmann::json ReportCollection::to_json() const {
  nlohmann::json j;
  j["suite"] = suite_;
  j["n"] = n_;
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  j["config"] = config_;
  j["cases"] = nlohmann::json::array();
  for (const auto& c : cases_) j["cases"].push_back(c.to_json());
  j["totals"] = {{"cases", cases_.size()}, {"passed", passed()}, {"failed", failed()}};
  return j;
}

std::string ReportCollection::to_csv() const {
  std::ostringstream out;
  out << "name,lhs,rhs,slack,pass,method,stderr,runtime_ms\n";
  out << std::setprecision(17);
  for (const auto& c : cases_) {
    out << '"' << c.name << "\"," << c.lhs << ',' << c.rhs << ',' << c.slack << ',' << (c.pass ? "true" : "false") << ','
        << (c.method == VerificationReport::Method::exact ? "exact" : "monte_carlo") << ',';
    if (c.method == VerificationReport::Method::monte_carlo) out << c.std_error;
    out << ',' << c.runtime_ms << '\n';
  }
  return out.str();
}

}  // namespace permlab
