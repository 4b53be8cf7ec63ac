// Copyright 2026 The stopaudit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STOPAUDIT_MPC_H_
#define STOPAUDIT_MPC_H_

// Secret-shared construction of the auxiliary similarity map.
//
// Ratings are additively shared over GF(2^61 - 1) among n semi-honest
// parties. Pairwise products and squared norms are computed on shares with
// Beaver triples from a seeded dealer and summed locally; only the three
// per-pair aggregates are opened. Division and square root happen in the
// clear (finalize_similarity).

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stopaudit/rng.h"
#include "stopaudit/similarity.h"
#include "stopaudit/types.h"

namespace stopaudit::mpc {

inline constexpr std::uint64_t kModulus = (std::uint64_t{1} << 61) - 1;
inline constexpr int kFractionBits = 16;
inline constexpr std::uint64_t kScale = std::uint64_t{1} << kFractionBits;

// Element of GF(2^61 - 1).
class FieldElement {
 public:
  constexpr FieldElement() = default;
  // Reduces any 64-bit value.
  explicit FieldElement(std::uint64_t v) : value_(reduce(v)) {}

  std::uint64_t value() const { return value_; }

  static FieldElement random(Rng& rng);

  friend FieldElement operator+(FieldElement a, FieldElement b);
  friend FieldElement operator-(FieldElement a, FieldElement b);
  friend FieldElement operator*(FieldElement a, FieldElement b);
  FieldElement& operator+=(FieldElement o) { return *this = *this + o; }
  FieldElement& operator-=(FieldElement o) { return *this = *this - o; }
  bool operator==(const FieldElement&) const = default;

 private:
  static std::uint64_t reduce(std::uint64_t v);
  std::uint64_t value_ = 0;
};

// round(x * 2^16) for x in [0, 1].
FieldElement encode_fixed(double x);
// Inverse of encode_fixed at scale 2^16.
double decode_fixed(FieldElement v);
// Decodes a product of two encoded values (scale 2^32).
double decode_product(FieldElement v);

struct ShareVector {
  std::vector<FieldElement> shares;
  std::size_t n_parties() const { return shares.size(); }
};

ShareVector share(FieldElement secret, std::size_t n_parties, Rng& rng);
FieldElement reconstruct(const ShareVector& shares);

// A dealer-produced multiplication triple, shared: c = a * b.
struct BeaverTriple {
  ShareVector a, b, c;
};

BeaverTriple deal_triple(std::size_t n_parties, Rng& dealer);

// Shares of x * y. Opens only the masked differences x - a and y - b.
ShareVector multiply(const ShareVector& x, const ShareVector& y,
                     const BeaverTriple& triple);

ShareVector add(const ShareVector& x, const ShareVector& y);

// Largest common-rater count whose sums stay below the modulus at scale
// 2^32.
std::size_t max_common_raters();

// Aggregates for one item pair computed on shares. Ratings are shared
// inside with a stream derived from (seed, a, b) so results do not depend
// on evaluation order.
PairAggregates secure_pair_aggregates(const ItemId& a, const RaterColumn& col_a,
                                      const ItemId& b, const RaterColumn& col_b,
                                      std::size_t n_parties, std::uint64_t seed);

PairAggregator shared_aggregator(std::size_t n_parties, std::uint64_t seed);

SimilarityMap mpc_build_similarity(const std::vector<RatingRecord>& records,
                                   std::size_t n_parties, std::uint64_t seed);

// Strategy for building a similarity map. The plaintext and shared
// backends are interchangeable behind it.
class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  virtual std::string name() const = 0;
  virtual PairAggregator aggregator() const = 0;
  SimilarityMap build(const std::vector<RatingRecord>& records) const {
    return build_similarity(ratings_by_item(records), aggregator());
  }
};

class PlaintextBackend : public SimilarityBackend {
 public:
  std::string name() const override { return "plaintext"; }
  PairAggregator aggregator() const override { return plaintext_aggregator(); }
};

class SharedBackend : public SimilarityBackend {
 public:
  SharedBackend(std::size_t n_parties, std::uint64_t seed);
  std::string name() const override { return "shared"; }
  PairAggregator aggregator() const override {
    return shared_aggregator(n_parties_, seed_);
  }

 private:
  std::size_t n_parties_;
  std::uint64_t seed_;
};

std::unique_ptr<SimilarityBackend> make_backend(const std::string& name,
                                                std::size_t n_parties,
                                                std::uint64_t seed);

}  // namespace stopaudit::mpc

#endif  // STOPAUDIT_MPC_H_
