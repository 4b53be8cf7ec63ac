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

#ifndef STOPAUDIT_SIMILARITY_H_
#define STOPAUDIT_SIMILARITY_H_

#include <functional>
#include <map>
#include <vector>

#include "stopaudit/types.h"

namespace stopaudit {

// Item column of the rating matrix: rater -> rating. Ordered by user so that
// every reduction over raters runs in the same order.
using RaterColumn = std::map<UserId, double>;
using RatingsByItem = std::map<ItemId, RaterColumn>;

RatingsByItem ratings_by_item(const std::vector<RatingRecord>& records);

// Sums over the users I who rated both items.
struct PairAggregates {
  double dot = 0.0;     // sum r_a * r_b
  double norm_a = 0.0;  // sum r_a^2
  double norm_b = 0.0;  // sum r_b^2
  std::size_t common = 0;
};

PairAggregates plaintext_aggregates(const RaterColumn& a, const RaterColumn& b);

// dot / (sqrt(norm_a) * sqrt(norm_b)), 0 when either norm is 0, clamped to
// [0, 1] against rounding.
double finalize_similarity(const PairAggregates& agg);

// Computes the aggregates for one item pair. The plaintext and the
// secret-shared backends both fit this shape.
using PairAggregator =
    std::function<PairAggregates(const ItemId&, const RaterColumn&,
                                 const ItemId&, const RaterColumn&)>;

PairAggregator plaintext_aggregator();

// Sparse symmetric item-pair similarity store. Absent pairs have similarity
// 0; self-pairs are never stored.
class SimilarityMap {
 public:
  using Row = std::map<ItemId, double>;

  double similarity(const ItemId& a, const ItemId& b) const;
  bool has_pair(const ItemId& a, const ItemId& b) const;

  // Items with nonzero similarity to `a`, ordered by id.
  const Row& row(const ItemId& a) const;

  // Stores value (> 0) or erases the pair (value == 0).
  void set(const ItemId& a, const ItemId& b, double value);

  // Adds an item to the universe without any pair.
  void add_item(const ItemId& a);

  const std::map<ItemId, Row>& rows() const { return rows_; }
  const ItemSet& universe() const { return universe_; }
  std::size_t pair_count() const { return pairs_; }
  bool empty() const { return pairs_ == 0; }

  // Calls fn(a, b, sim) once per stored pair with a < b, in id order.
  void for_each_pair(
      const std::function<void(const ItemId&, const ItemId&, double)>& fn) const;

  // Pair keys equal and every value within `tol`.
  bool approx_equal(const SimilarityMap& other, double tol) const;

  // Largest entrywise |difference|, treating absent pairs as 0.
  double max_abs_diff(const SimilarityMap& other) const;

  // Same pairs with bit-identical values. The item universe is not compared.
  bool operator==(const SimilarityMap& other) const {
    return rows_ == other.rows_;
  }

 private:
  std::map<ItemId, Row> rows_;  // nonempty rows only
  ItemSet universe_;
  std::size_t pairs_ = 0;
};

// From-scratch item-item cosine over common raters.
SimilarityMap build_similarity(const RatingsByItem& ratings,
                               const PairAggregator& aggregator =
                                   plaintext_aggregator());

SimilarityMap build_similarity(const std::vector<RatingRecord>& records);

// Recomputes the pair (a, b) from rater columns and writes it into `map`.
void refresh_pair(SimilarityMap& map, const RatingsByItem& ratings,
                  const ItemId& a, const ItemId& b,
                  const PairAggregator& aggregator);

}  // namespace stopaudit

#endif  // STOPAUDIT_SIMILARITY_H_
