#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace permlab {

// Elements of [N] are stored 0-based. Text I/O is 1-based.
using Element = std::uint32_t;

// Largest N for which whole-group enumeration is offered.
inline constexpr std::size_t kExactCeiling = 8;

std::uint64_t factorial(std::size_t n);

class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<Element> images);

  static Permutation identity(std::size_t n);
  static Permutation transposition(std::size_t n, Element a, Element b);
  // Parses 1-based one-line notation such as "2 3 1".
  static Permutation parse(std::string_view text);

  std::string str() const;
  std::size_t size() const { return images_.size(); }
  Element operator()(Element x) const { return images_[x]; }
  std::span<const Element> images() const { return images_; }

  Permutation inverse() const;
  bool is_identity() const;
  std::size_t cycle_count() const;

  // (a * b)(x) = a(b(x))
  friend Permutation operator*(const Permutation& a, const Permutation& b);
  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<Element> images_;
};

// Transposition data t_1..t_N with t_k in [k]; stored 0-based so t[k] <= k.
class MonotoneFactorization {
 public:
  MonotoneFactorization() = default;
  explicit MonotoneFactorization(std::vector<Element> t);

  static MonotoneFactorization identity(std::size_t n);
  // Mixed-radix decoding; t_2 is the least significant digit.
  static MonotoneFactorization from_index(std::size_t n, std::uint64_t index);
  // Parses "t: 1 1 1" (1-based, the "t:" prefix is optional).
  static MonotoneFactorization parse(std::string_view text);

  std::string str() const;
  std::size_t size() const { return t_.size(); }
  Element operator[](std::size_t k) const { return t_[k]; }
  std::span<const Element> values() const { return t_; }
  std::uint64_t index() const;

  friend bool operator==(const MonotoneFactorization&, const MonotoneFactorization&) = default;

 private:
  std::vector<Element> t_;
};

MonotoneFactorization monotone_factorize(const Permutation& p);
Permutation compose_from_factors(const MonotoneFactorization& f);
Permutation invert(const Permutation& p);
// Reversed product <1 t_1>...<N t_N>.
Permutation invert_via_factors(const MonotoneFactorization& f);

enum class Side { above, below };
// pi_{>k} (factors N..k+1) or pi_{<k} (factors k-1..1); k is 0-based.
Permutation partial_product(const MonotoneFactorization& f, std::size_t k, Side side);

Permutation sample_uniform(std::size_t n, std::mt19937_64& rng);
MonotoneFactorization sample_uniform_factors(std::size_t n, std::mt19937_64& rng);

enum class ActiveKind { forward, inverse };

struct ActiveSet {
  ActiveKind kind = ActiveKind::forward;
  std::vector<Element> members;  // sorted, 0-based
  bool contains(Element k) const;
  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

ActiveSet active_set(const MonotoneFactorization& f, Element x);
ActiveSet active_set(const Permutation& p, Element x);
ActiveSet inverse_active_set(const MonotoneFactorization& f, Element y);
ActiveSet inverse_active_set(const Permutation& p, Element y);

// Forward: composes the active factors in ascending order of k to get pi(x).
// Inverse: applies the inverse-active factors from the largest k down to get pi^{-1}(x).
Element apply_via_active(const MonotoneFactorization& f, Element x, ActiveKind kind);

enum class ExpectationMethod { exact, recurrence, monte_carlo };

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct ExpectationOptions {
  std::optional<std::uint64_t> seed;
  std::size_t samples = 200000;
};

// arg is 0-based. Exact needs n <= kExactCeiling; recurrence serves the inverse kind only.
Estimate expected_active_size(std::size_t n, Element arg, ActiveKind kind, ExpectationMethod method,
                              const ExpectationOptions& options = {});

// f(0) = 0, f(m) = m + (1/m) sum_{k<m} f(k)
double active_recurrence_f(std::size_t m);
boost::multiprecision::cpp_rational active_recurrence_f_exact(std::size_t m);
// e(N, y) = 1 + f(y-1)/N with 1-based y.
double inverse_active_expectation(std::size_t n, std::size_t y_one_based);
boost::multiprecision::cpp_rational inverse_active_expectation_exact(std::size_t n,
                                                                    std::size_t y_one_based);

std::size_t cayley_distance(const MonotoneFactorization& f);

// Dense lookup tables over all of S_N indexed by the mixed-radix factor index.
class PermutationTable {
 public:
  explicit PermutationTable(std::size_t n);

  std::size_t n() const { return n_; }
  std::size_t count() const { return count_; }
  Element image(std::size_t index, Element x) const { return images_[index * n_ + x]; }
  Element preimage(std::size_t index, Element y) const { return inverses_[index * n_ + y]; }
  Element factor(std::size_t index, std::size_t k) const { return factors_[index * n_ + k]; }
  // Place value of D_k in the mixed-radix index, (k)! for 0-based k.
  std::size_t stride(std::size_t k) const { return strides_[k]; }
  Permutation perm(std::size_t index) const;
  std::size_t index_of(const Permutation& p) const;
  // result[i] = index_of(left * perm(i) * right)
  std::vector<std::uint32_t> relabel(const Permutation& left, const Permutation& right) const;

 private:
  std::size_t n_;
  std::size_t count_;
  std::vector<std::uint8_t> images_;
  std::vector<std::uint8_t> inverses_;
  std::vector<std::uint8_t> factors_;
  std::vector<std::size_t> strides_;
};

// Deterministic ordered chunked map over [0, count).
void parallel_for(std::size_t count, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace permlab
