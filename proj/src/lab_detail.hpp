#pragma once

// Shared plumbing for the lemma_lab sources.

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "permlab/lemma_lab.hpp"

namespace permlab::detail {

// Geometry of a canonical joint state [D1..DN], Y, X, rest.
struct JointShape {
  std::size_t n = 0;
  std::size_t db = 1;     // N!
  std::size_t outer = 1;  // product of the work register dims
  std::size_t rest() const { return n * n * outer; }
  std::size_t index(std::size_t d, std::size_t y, std::size_t x, std::size_t w) const { return d + db * (y + n * (x + n * w)); }
};

JointShape joint_shape(const StateVector& s);

// Number of D registers at the front of the layout (0 when there is no database).
std::size_t database_degree(const RegisterLayout& layout);

// Calls f(base) for every database index whose D_k digit is zero; the group members are
// base + t * stride(k) for t = 0..k.
template <typename F>
void for_each_group(const PermutationTable& t, std::size_t k, F&& f) {
  const std::size_t stride = t.stride(k);
  const std::size_t block = stride * (k + 1);
  for (std::size_t hi = 0; hi < t.count(); hi += block)
    for (std::size_t lo = 0; lo < stride; ++lo) f(hi + lo);
}

// In-place maps on `blocks` consecutive database vectors of length N!.
void plus_complement_inplace(cplx* v, std::size_t n, std::size_t x, std::size_t blocks);
void plus_inplace(cplx* v, std::size_t n, std::size_t x, std::size_t blocks);
void relation_mask_inplace(cplx* v, const Relation& r, std::size_t x, std::size_t blocks, bool keep_members = true);

// pi_{>x}(v) and its inverse for the factorization stored at table index `d`.
Element above_apply(const PermutationTable& t, std::size_t d, std::size_t x, Element v);
Element above_apply_inverse(const PermutationTable& t, std::size_t d, std::size_t x, Element v);

struct TwirlPair {
  Permutation sigma;
  Permutation tau;
  std::size_t stratum = 0;  // x assigned to this sample in sampled mode
};

// Every pair of S_N x S_N, or `samples` seeded draws with x strata assigned round-robin.
std::vector<TwirlPair> twirl_pairs(std::size_t n, const TwirlSampling& mode);

// Turns per-pair values into an estimate of sum_x E_{sigma,tau} f. Exhaustive values are full sums
// over x; sampled values belong to the pair's stratum.
Estimate combine_pairs(const std::vector<TwirlPair>& pairs, const std::vector<double>& values, std::size_t n, bool exhaustive);

// Sum over x with (x, pi(x)) in R of the weight of |pi>|pi(x)>|x> in an untwirled joint state.
double accepted_weight(const StateVector& phi, const Relation& r);

// Evaluates body(i) for all i and keeps the results in index order.
std::vector<double> map_indices(std::size_t count, const std::function<double(std::size_t)>& body);

}  // namespace permlab::detail
