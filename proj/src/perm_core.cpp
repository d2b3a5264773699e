#include "permlab/perm_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "permlab/errors.hpp"

namespace permlab {

namespace {

constexpr std::size_t kMaxIndexable = 20;

void check_element(std::size_t n, Element x, const char* what) {
  if (x >= n) throw std::out_of_range(std::string(what) + " outside [N]");
}

std::vector<std::size_t> parse_numbers(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::size_t> out;
  std::string tok;
  while (in >> tok) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + tok + "'");
    }
    if (pos != tok.size() || tok[0] == '-') throw std::invalid_argument("not a number: '" + tok + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Peels t_N = pi(N) and recurses on <N t_N> pi, tracking the inverse alongside.
template <typename OutT>
void factorize_into(const Element* images, std::size_t n, OutT* t) {
  Element p[kMaxIndexable];
  Element inv[kMaxIndexable];
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = images[i];
    inv[images[i]] = static_cast<Element>(i);
  }
  for (std::size_t k = n; k-- > 0;) {
    const Element tk = p[k];
    t[k] = static_cast<OutT>(tk);
    const Element a = inv[k];
    p[a] = tk;
    inv[tk] = a;
    p[k] = static_cast<Element>(k);
    inv[k] = static_cast<Element>(k);
  }
}

std::uint64_t index_of_images(const Element* images, std::size_t n) {
  Element t[kMaxIndexable];
  factorize_into(images, n, t);
  std::uint64_t index = 0;
  for (std::size_t k = n; k-- > 1;) index = index * (k + 1) + t[k];
  return index;
}

}  // namespace

std::uint64_t factorial(std::size_t n) {
  if (n > kMaxIndexable) throw SizeLimitError("factorial overflows 64 bits above 20");
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

// ---------------------------------------------------------------- Permutation

Permutation::Permutation(std::vector<Element> images) : images_(std::move(images)) {
  if (images_.empty()) throw std::invalid_argument("permutation of an empty set");
  std::vector<bool> seen(images_.size(), false);
  for (Element v : images_) {
    if (v >= images_.size() || seen[v]) throw std::invalid_argument("images are not a bijection of [N]");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<Element> im(n);
  std::iota(im.begin(), im.end(), Element{0});
  return Permutation(std::move(im));
}

Permutation Permutation::transposition(std::size_t n, Element a, Element b) {
  check_element(n, a, "transposition point");
  check_element(n, b, "transposition point");
  std::vector<Element> im(n);
  std::iota(im.begin(), im.end(), Element{0});
  std::swap(im[a], im[b]);
  return Permutation(std::move(im));
}

Permutation Permutation::parse(std::string_view text) {
  auto nums = parse_numbers(text);
  std::vector<Element> im;
  im.reserve(nums.size());
  for (auto v : nums) {
    if (v == 0 || v > nums.size()) throw std::invalid_argument("one-line entry outside [N]");
    im.push_back(static_cast<Element>(v - 1));
  }
  return Permutation(std::move(im));
}

std::string Permutation::str() const {
  std::string s;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(images_[i] + 1);
  }
  return s;
}

Permutation Permutation::inverse() const {
  std::vector<Element> inv(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = static_cast<Element>(i);
  return Permutation(std::move(inv));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < images_.size(); ++i)
    if (images_[i] != i) return false;
  return true;
}

std::size_t Permutation::cycle_count() const {
  std::vector<bool> seen(images_.size(), false);
  std::size_t cycles = 0;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (std::size_t j = i; !seen[j]; j = images_[j]) seen[j] = true;
  }
  return cycles;
}

Permutation operator*(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw std::invalid_argument("composing permutations of different degree");
  std::vector<Element> im(a.size());
  for (std::size_t i = 0; i < im.size(); ++i) im[i] = a.images_[b.images_[i]];
  return Permutation(std::move(im));
}

// ------------------------------------------------------ MonotoneFactorization

MonotoneFactorization::MonotoneFactorization(std::vector<Element> t) : t_(std::move(t)) {
  if (t_.empty()) throw std::invalid_argument("factorization of an empty set");
  for (std::size_t k = 0; k < t_.size(); ++k)
    if (t_[k] > k) throw std::invalid_argument("factor t_k must lie in [k]");
}

MonotoneFactorization MonotoneFactorization::identity(std::size_t n) {
  std::vector<Element> t(n);
  std::iota(t.begin(), t.end(), Element{0});
  return MonotoneFactorization(std::move(t));
}

MonotoneFactorization MonotoneFactorization::from_index(std::size_t n, std::uint64_t index) {
  if (index >= factorial(n)) throw std::out_of_range("factorization index beyond N!");
  std::vector<Element> t(n, 0);
  for (std::size_t k = 1; k < n; ++k) {
    t[k] = static_cast<Element>(index % (k + 1));
    index /= (k + 1);
  }
  return MonotoneFactorization(std::move(t));
}

MonotoneFactorization MonotoneFactorization::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    auto head = text.substr(0, colon);
    while (!head.empty() && std::isspace(static_cast<unsigned char>(head.front()))) head.remove_prefix(1);
    while (!head.empty() && std::isspace(static_cast<unsigned char>(head.back()))) head.remove_suffix(1);
    if (head != "t") throw std::invalid_argument("factorization text must start with 't:'");
    text = text.substr(colon + 1);
  }
  auto nums = parse_numbers(text);
  std::vector<Element> t;
  for (std::size_t k = 0; k < nums.size(); ++k) {
    if (nums[k] == 0 || nums[k] > k + 1) throw std::invalid_argument("factor t_k must lie in [k]");
    t.push_back(static_cast<Element>(nums[k] - 1));
  }
  return MonotoneFactorization(std::move(t));
}

std::string MonotoneFactorization::str() const {
  std::string s = "t:";
  for (Element v : t_) s += ' ' + std::to_string(v + 1);
  return s;
}

std::uint64_t MonotoneFactorization::index() const {
  if (t_.size() > kMaxIndexable) throw SizeLimitError("factor index needs N <= 20");
  std::uint64_t index = 0;
  for (std::size_t k = t_.size(); k-- > 1;) index = index * (k + 1) + t_[k];
  return index;
}

// ------------------------------------------------------------ factorization

MonotoneFactorization monotone_factorize(const Permutation& p) {
  const std::size_t n = p.size();
  std::vector<Element> im(p.images().begin(), p.images().end());
  std::vector<Element> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[im[i]] = static_cast<Element>(i);
  std::vector<Element> t(n);
  for (std::size_t k = n; k-- > 0;) {
    const Element tk = im[k];
    t[k] = tk;
    const Element a = inv[k];
    im[a] = tk;
    inv[tk] = a;
    im[k] = static_cast<Element>(k);
    inv[k] = static_cast<Element>(k);
  }
  return MonotoneFactorization(std::move(t));
}

Permutation compose_from_factors(const MonotoneFactorization& f) {
  const std::size_t n = f.size();
  std::vector<Element> im(n);
  std::iota(im.begin(), im.end(), Element{0});
  for (std::size_t k = n; k-- > 0;) std::swap(im[k], im[f[k]]);
  return Permutation(std::move(im));
}

Permutation invert(const Permutation& p) { return p.inverse(); }

Permutation invert_via_factors(const MonotoneFactorization& f) {
  const std::size_t n = f.size();
  std::vector<Element> im(n);
  std::iota(im.begin(), im.end(), Element{0});
  for (std::size_t k = 0; k < n; ++k) std::swap(im[k], im[f[k]]);
  return Permutation(std::move(im));
}

Permutation partial_product(const MonotoneFactorization& f, std::size_t k, Side side) {
  const std::size_t n = f.size();
  if (k >= n) throw std::out_of_range("partial product index outside [N]");
  std::vector<Element> im(n);
  std::iota(im.begin(), im.end(), Element{0});
  const std::size_t hi = side == Side::above ? n : k;
  const std::size_t lo = side == Side::above ? k + 1 : 0;
  for (std::size_t j = hi; j-- > lo;) std::swap(im[j], im[f[j]]);
  return Permutation(std::move(im));
}

MonotoneFactorization sample_uniform_factors(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("sample_uniform needs n >= 1");
  std::vector<Element> t(n, 0);
  for (std::size_t k = 1; k < n; ++k) t[k] = static_cast<Element>(std::uniform_int_distribution<std::size_t>(0, k)(rng));
  return MonotoneFactorization(std::move(t));
}

Permutation sample_uniform(std::size_t n, std::mt19937_64& rng) {
  return compose_from_factors(sample_uniform_factors(n, rng));
}

// ---------------------------------------------------------------- active sets

bool ActiveSet::contains(Element k) const { return std::binary_search(members.begin(), members.end(), k); }

namespace {
inline Element swap_apply(Element k, Element tk, Element v) {
  if (v == k) return tk;
  if (v == tk) return k;
  return v;
}
}  // namespace

ActiveSet active_set(const MonotoneFactorization& f, Element x) {
  check_element(f.size(), x, "argument");
  ActiveSet s{ActiveKind::forward, {}};
  Element v = x;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Element kk = static_cast<Element>(k);
    if (v == kk || v == f[k]) s.members.push_back(kk);
    v = swap_apply(kk, f[k], v);
  }
  return s;
}

ActiveSet active_set(const Permutation& p, Element x) { return active_set(monotone_factorize(p), x); }

ActiveSet inverse_active_set(const MonotoneFactorization& f, Element y) {
  check_element(f.size(), y, "argument");
  ActiveSet s{ActiveKind::inverse, {}};
  Element v = y;
  for (std::size_t k = f.size(); k-- > 0;) {
    const Element kk = static_cast<Element>(k);
    if (v == kk || v == f[k]) s.members.push_back(kk);
    v = swap_apply(kk, f[k], v);
  }
  std::reverse(s.members.begin(), s.members.end());
  return s;
}

ActiveSet inverse_active_set(const Permutation& p, Element y) {
  return inverse_active_set(monotone_factorize(p), y);
}

Element apply_via_active(const MonotoneFactorization& f, Element x, ActiveKind kind) {
  if (kind == ActiveKind::forward) {
    Element v = x;
    for (Element k : active_set(f, x).members) v = swap_apply(k, f[k], v);
    return v;
  }
  const auto members = inverse_active_set(f, x).members;
  Element v = x;
  for (auto it = members.rbegin(); it != members.rend(); ++it) v = swap_apply(*it, f[*it], v);
  return v;
}

// ---------------------------------------------------------------- expectations

double active_recurrence_f(std::size_t m) {
  std::vector<double> f(m + 1, 0.0);
  double prefix = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    prefix += f[j - 1];
    f[j] = static_cast<double>(j) + prefix / static_cast<double>(j);
  }
  return f[m];
}

boost::multiprecision::cpp_rational active_recurrence_f_exact(std::size_t m) {
  using boost::multiprecision::cpp_rational;
  std::vector<cpp_rational> f(m + 1, cpp_rational(0));
  cpp_rational prefix = 0;
  for (std::size_t j = 1; j <= m; ++j) {
    prefix += f[j - 1];
    f[j] = cpp_rational(j) + prefix / cpp_rational(j);
  }
  return f[m];
}

double inverse_active_expectation(std::size_t n, std::size_t y) {
  if (y == 0 || y > n) throw std::out_of_range("y outside [N]");
  return 1.0 + active_recurrence_f(y - 1) / static_cast<double>(n);
}

boost::multiprecision::cpp_rational inverse_active_expectation_exact(std::size_t n, std::size_t y) {
  using boost::multiprecision::cpp_rational;
  if (y == 0 || y > n) throw std::out_of_range("y outside [N]");
  return cpp_rational(1) + active_recurrence_f_exact(y - 1) / cpp_rational(n);
}

Estimate expected_active_size(std::size_t n, Element arg, ActiveKind kind, ExpectationMethod method,
                              const ExpectationOptions& options) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  check_element(n, arg, "argument");
  auto size_of = [&](const MonotoneFactorization& f) {
    return kind == ActiveKind::forward ? active_set(f, arg).members.size()
                                       : inverse_active_set(f, arg).members.size();
  };
  switch (method) {
    case ExpectationMethod::exact: {
      if (n > kExactCeiling) throw SizeLimitError("exact enumeration is limited to N <= 8");
      const std::uint64_t count = factorial(n);
      std::uint64_t total = 0;
      for (std::uint64_t i = 0; i < count; ++i) total += size_of(MonotoneFactorization::from_index(n, i));
      return {static_cast<double>(total) / static_cast<double>(count), 0.0, static_cast<std::size_t>(count)};
    }
    case ExpectationMethod::recurrence: {
      if (kind != ActiveKind::inverse)
        throw UnsupportedMethodError("the recurrence describes the inverse active set only");
      const double value = inverse_active_expectation(n, arg + 1);
      if (n <= 12) {
        const double exact = static_cast<double>(inverse_active_expectation_exact(n, arg + 1));
        if (std::abs(exact - value) > 1e-12) throw std::logic_error("recurrence disagrees with rational value");
      }
      return {value, 0.0, 0};
    }
    case ExpectationMethod::monte_carlo: {
      if (!options.seed) throw std::invalid_argument("Monte Carlo estimation requires a seed");
      if (options.samples < 2) throw std::invalid_argument("Monte Carlo needs at least two samples");
      std::mt19937_64 rng(*options.seed);
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t s = 0; s < options.samples; ++s) {
        const double v = static_cast<double>(size_of(sample_uniform_factors(n, rng)));
        sum += v;
        sum_sq += v * v;
      }
      const double m = static_cast<double>(options.samples);
      const double mean = sum / m;
      const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
      return {mean, std::sqrt(var / m), options.samples};
    }
  }
  throw UnsupportedMethodError("unknown method");
}

std::size_t cayley_distance(const MonotoneFactorization& f) {
  std::size_t d = 0;
  for (std::size_t k = 0; k < f.size(); ++k) d += f[k] != k;
  return d;
}

// ------------------------------------------------------------ PermutationTable

PermutationTable::PermutationTable(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (n > kExactCeiling) throw SizeLimitError("permutation tables are limited to N <= 8");
  count_ = static_cast<std::size_t>(factorial(n));
  images_.resize(count_ * n);
  inverses_.resize(count_ * n);
  factors_.resize(count_ * n);
  strides_.resize(n);
  for (std::size_t k = 0; k < n; ++k) strides_[k] = static_cast<std::size_t>(factorial(k));
  for (std::size_t i = 0; i < count_; ++i) {
    std::size_t rem = i;
    std::uint8_t* t = &factors_[i * n];
    t[0] = 0;
    for (std::size_t k = 1; k < n; ++k) {
      t[k] = static_cast<std::uint8_t>(rem % (k + 1));
      rem /= (k + 1);
    }
    std::uint8_t* im = &images_[i * n];
    for (std::size_t x = 0; x < n; ++x) im[x] = static_cast<std::uint8_t>(x);
    for (std::size_t k = n; k-- > 0;) std::swap(im[k], im[t[k]]);
    for (std::size_t x = 0; x < n; ++x) inverses_[i * n + im[x]] = static_cast<std::uint8_t>(x);
  }
}

Permutation PermutationTable::perm(std::size_t index) const {
  std::vector<Element> im(n_);
  for (std::size_t x = 0; x < n_; ++x) im[x] = images_[index * n_ + x];
  return Permutation(std::move(im));
}

std::size_t PermutationTable::index_of(const Permutation& p) const {
  if (p.size() != n_) throw std::invalid_argument("permutation degree does not match the table");
  return static_cast<std::size_t>(index_of_images(p.images().data(), n_));
}

std::vector<std::uint32_t> PermutationTable::relabel(const Permutation& left, const Permutation& right) const {
  if (left.size() != n_ || right.size() != n_) throw std::invalid_argument("permutation degree does not match the table");
  std::vector<std::uint32_t> out(count_);
  const Element* l = left.images().data();
  const Element* r = right.images().data();
  parallel_for(count_, [&](std::size_t begin, std::size_t end) {
    Element im[kMaxIndexable];
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint8_t* p = &images_[i * n_];
      for (std::size_t x = 0; x < n_; ++x) im[x] = l[p[r[x]]];
      out[i] = static_cast<std::uint32_t>(index_of_images(im, n_));
    }
  });
  return out;
}

// ---------------------------------------------------------------- parallelism

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, count / 4096 + 1);
  if (workers <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    threads.emplace_back(body, b, e);
  }
  for (auto& t : threads) t.join();
}

}  // namespace permlab
