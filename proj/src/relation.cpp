#include "permlab/relation.hpp"

#include <algorithm>
#include <stdexcept>

namespace permlab {

Relation::Relation(std::size_t n, std::string name) : n_(n), bits_(n * n, 0), name_(std::move(name)) { rebuild(); }

Relation Relation::empty(std::size_t n) { return Relation(n, "empty"); }

Relation Relation::full(std::size_t n) {
  Relation r(n, "full");
  std::fill(r.bits_.begin(), r.bits_.end(), 1);
  r.rebuild();
  return r;
}

Relation Relation::from_pairs(std::size_t n, const std::vector<std::pair<Element, Element>>& pairs, std::string name) {
  Relation r(n, std::move(name));
  for (const auto& [x, y] : pairs) {
    if (x >= n || y >= n) throw std::out_of_range("relation pair outside [N] x [N]");
    r.bits_[x * n + y] = 1;
  }
  r.rebuild();
  return r;
}

Relation Relation::graph_of(const Permutation& p) {
  Relation r(p.size(), "graph");
  for (Element x = 0; x < p.size(); ++x) r.bits_[x * p.size() + p(x)] = 1;
  r.rebuild();
  return r;
}

Relation Relation::sponge(std::size_t n_bits, std::size_t c, std::size_t target) {
  if (c >= n_bits) throw std::invalid_argument("capacity must be below the width");
  if (target >= (std::size_t{1} << (n_bits - c))) throw std::out_of_range("target has more than n-c bits");
  const std::size_t n = std::size_t{1} << n_bits;
  const std::size_t low = (std::size_t{1} << c) - 1;
  Relation r(n, "sponge");
  for (std::size_t x = 0; x < n; ++x) {
    if ((x & low) != 0) continue;
    for (std::size_t y = 0; y < n; ++y)
      if ((y >> c) == target) r.bits_[x * n + y] = 1;
  }
  r.rebuild();
  return r;
}

Relation Relation::zero_search(std::size_t n_bits, std::size_t c) {
  if (c > n_bits) throw std::invalid_argument("more zero bits than the width");
  const std::size_t n = std::size_t{1} << n_bits;
  const std::size_t low = (std::size_t{1} << c) - 1;
  Relation r(n, "zero-search");
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if ((x & low) == 0 && (y & low) == 0) r.bits_[x * n + y] = 1;
  r.rebuild();
  return r;
}

Relation Relation::random(std::size_t n, double density, std::mt19937_64& rng) {
  Relation r(n, "random");
  std::bernoulli_distribution coin(density);
  for (auto& b : r.bits_) b = coin(rng) ? 1 : 0;
  r.rebuild();
  return r;
}

void Relation::insert(Element x, Element y) {
  bits_.at(x * n_ + y) = 1;
  rebuild();
}

void Relation::erase(Element x, Element y) {
  bits_.at(x * n_ + y) = 0;
  rebuild();
}

std::size_t Relation::size() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

std::size_t Relation::r_max() const {
  std::size_t best = 0;
  for (const auto& s : sections_) best = std::max(best, s.size());
  for (const auto& s : inverse_sections_) best = std::max(best, s.size());
  return best;
}

void Relation::rebuild() {
  sections_.assign(n_, {});
  inverse_sections_.assign(n_, {});
  for (Element x = 0; x < n_; ++x)
    for (Element y = 0; y < n_; ++y)
      if (bits_[x * n_ + y]) {
        sections_[x].push_back(y);
        inverse_sections_[y].push_back(x);
      }
}

Relation twirl_relation(const Relation& r, const Permutation& sigma, const Permutation& tau) {
  if (sigma.size() != r.n() || tau.size() != r.n()) throw std::invalid_argument("twirl degree does not match the relation");
  std::vector<std::pair<Element, Element>> pairs;
  for (Element x = 0; x < r.n(); ++x)
    for (Element y : r.section(x)) pairs.emplace_back(sigma(x), tau(y));
  return Relation::from_pairs(r.n(), pairs, r.name());
}

}  // namespace permlab
