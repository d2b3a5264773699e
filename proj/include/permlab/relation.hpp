#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "permlab/perm_core.hpp"

namespace permlab {

// A subset of [N] x [N] stored as a dense bitset with cached sections.
class Relation {
 public:
  Relation() = default;
  Relation(std::size_t n, std::string name = {});

  static Relation empty(std::size_t n);
  static Relation full(std::size_t n);
  static Relation from_pairs(std::size_t n, const std::vector<std::pair<Element, Element>>& pairs, std::string name = {});
  static Relation graph_of(const Permutation& p);
  // (x, y) with the low c bits of x zero and the high n-c bits of y equal to `target`.
  static Relation sponge(std::size_t n_bits, std::size_t c, std::size_t target);
  // (x, y) with the low c bits of both x and y zero.
  static Relation zero_search(std::size_t n_bits, std::size_t c);
  // Each pair independently with probability `density`.
  static Relation random(std::size_t n, double density, std::mt19937_64& rng);

  std::size_t n() const { return n_; }
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  bool contains(Element x, Element y) const { return bits_[x * n_ + y] != 0; }
  void insert(Element x, Element y);
  void erase(Element x, Element y);

  const std::vector<Element>& section(Element x) const { return sections_[x]; }
  const std::vector<Element>& inverse_section(Element y) const { return inverse_sections_[y]; }
  std::size_t size() const;
  std::size_t r_max() const;
  bool is_empty() const { return size() == 0; }

  friend bool operator==(const Relation& a, const Relation& b) { return a.n_ == b.n_ && a.bits_ == b.bits_; }

 private:
  void rebuild();

  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<std::vector<Element>> sections_;
  std::vector<std::vector<Element>> inverse_sections_;
  std::string name_;
};

// (x, y) in the result iff (sigma^{-1}(x), tau^{-1}(y)) in r.
Relation twirl_relation(const Relation& r, const Permutation& sigma, const Permutation& tau);

}  // namespace permlab
