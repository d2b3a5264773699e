#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace permlab {

inline constexpr double kExactTolerance = 1e-9;
inline constexpr double kSigmaMultiplier = 3.0;

struct VerificationReport {
  enum class Method { exact, monte_carlo };

  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
  Method method = Method::exact;
  std::size_t samples = 0;
  double std_error = 0.0;
  double tolerance = kExactTolerance;
  double runtime_ms = 0.0;
  std::string note;

  // lhs <= rhs up to `tolerance`.
  static VerificationReport exact(std::string name, double lhs, double rhs, double tolerance = kExactTolerance);
  // lhs <= rhs up to kSigmaMultiplier standard errors.
  static VerificationReport monte_carlo(std::string name, double lhs, double rhs, double std_error, std::size_t samples);
  // |lhs - rhs| <= tolerance; slack is tolerance - |lhs - rhs|.
  static VerificationReport equality(std::string name, double lhs, double rhs, double tolerance);

  nlohmann::json to_json() const;
};

// Stamps runtime_ms on reports created within its lifetime.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const;
  VerificationReport stamp(VerificationReport r) const;

 private:
  std::chrono::steady_clock::time_point start_;
};

class ReportCollection {
 public:
  ReportCollection() = default;
  ReportCollection(std::string suite, std::size_t n, std::optional<std::uint64_t> seed, nlohmann::json config = nlohmann::json::object());

  void add(VerificationReport r) { cases_.push_back(std::move(r)); }
  void append(const std::vector<VerificationReport>& rs);
  void merge(const ReportCollection& other);

  const std::string& suite() const { return suite_; }
  const std::vector<VerificationReport>& cases() const { return cases_; }
  std::size_t passed() const;
  std::size_t failed() const { return cases_.size() - passed(); }
  bool all_pass() const { return failed() == 0; }

  nlohmann::json to_json() const;
  std::string to_csv() const;

 private:
  std::string suite_;
  std::size_t n_ = 0;
  std::optional<std::uint64_t> seed_;
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<VerificationReport> cases_;
};

}  // namespace permlab
