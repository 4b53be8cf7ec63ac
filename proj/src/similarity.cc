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

#include "stopaudit/similarity.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace stopaudit {

RatingsByItem ratings_by_item(const std::vector<RatingRecord>& records) {
  RatingsByItem out;
  for (const auto& r : records) out[r.item][r.user] = r.rating;
  return out;
}

PairAggregates plaintext_aggregates(const RaterColumn& a, const RaterColumn& b) {
  PairAggregates agg;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      agg.dot += ia->second * ib->second;
      agg.norm_a += ia->second * ia->second;
      agg.norm_b += ib->second * ib->second;
      ++agg.common;
      ++ia;
      ++ib;
    }
  }
  return agg;
}

double finalize_similarity(const PairAggregates& agg) {
  if (agg.norm_a <= 0.0 || agg.norm_b <= 0.0) return 0.0;
  double s = agg.dot / (std::sqrt(agg.norm_a) * std::sqrt(agg.norm_b));
  return std::clamp(s, 0.0, 1.0);
}

PairAggregator plaintext_aggregator() {
  return [](const ItemId&, const RaterColumn& a, const ItemId&,
            const RaterColumn& b) { return plaintext_aggregates(a, b); };
}

double SimilarityMap::similarity(const ItemId& a, const ItemId& b) const {
  auto it = rows_.find(a);
  if (it == rows_.end()) return 0.0;
  auto jt = it->second.find(b);
  return jt == it->second.end() ? 0.0 : jt->second;
}

bool SimilarityMap::has_pair(const ItemId& a, const ItemId& b) const {
  auto it = rows_.find(a);
  return it != rows_.end() && it->second.count(b) > 0;
}

const SimilarityMap::Row& SimilarityMap::row(const ItemId& a) const {
  static const Row kEmpty;
  auto it = rows_.find(a);
  return it == rows_.end() ? kEmpty : it->second;
}

void SimilarityMap::add_item(const ItemId& a) { universe_.insert(a); }

void SimilarityMap::set(const ItemId& a, const ItemId& b, double value) {
  if (a == b) throw Error("self-pair " + a);
  if (value < 0.0 || value > 1.0 || std::isnan(value)) {
    throw Error("similarity out of [0,1]");
  }
  universe_.insert(a);
  universe_.insert(b);
  if (value == 0.0) {
    auto erase_one = [this](const ItemId& x, const ItemId& y) {
      auto it = rows_.find(x);
      if (it == rows_.end()) return false;
      bool erased = it->second.erase(y) > 0;
      if (it->second.empty()) rows_.erase(it);
      return erased;
    };
    if (erase_one(a, b)) --pairs_;
    erase_one(b, a);
    return;
  }
  auto [it, inserted] = rows_[a].insert_or_assign(b, value);
  rows_[b][a] = value;
  if (inserted) ++pairs_;
}

void SimilarityMap::for_each_pair(
    const std::function<void(const ItemId&, const ItemId&, double)>& fn) const {
  for (const auto& [a, row] : rows_) {
    for (auto it = row.upper_bound(a); it != row.end(); ++it) {
      fn(a, it->first, it->second);
    }
  }
}

double SimilarityMap::max_abs_diff(const SimilarityMap& other) const {
  double worst = 0.0;
  for_each_pair([&](const ItemId& a, const ItemId& b, double v) {
    worst = std::max(worst, std::abs(v - other.similarity(a, b)));
  });
  other.for_each_pair([&](const ItemId& a, const ItemId& b, double v) {
    if (!has_pair(a, b)) worst = std::max(worst, v);
  });
  return worst;
}

bool SimilarityMap::approx_equal(const SimilarityMap& other, double tol) const {
  if (pairs_ != other.pairs_) return false;
  bool ok = true;
  for_each_pair([&](const ItemId& a, const ItemId& b, double v) {
    if (!other.has_pair(a, b) || std::abs(v - other.similarity(a, b)) > tol) {
      ok = false;
    }
  });
  return ok;
}

void refresh_pair(SimilarityMap& map, const RatingsByItem& ratings,
                  const ItemId& a, const ItemId& b,
                  const PairAggregator& aggregator) {
  static const RaterColumn kEmpty;
  auto ia = ratings.find(a);
  auto ib = ratings.find(b);
  const RaterColumn& ca = ia == ratings.end() ? kEmpty : ia->second;
  const RaterColumn& cb = ib == ratings.end() ? kEmpty : ib->second;
  // Canonical orientation keeps the reduction order independent of the
  // caller's argument order.
  const bool swap = b < a;
  PairAggregates agg = swap ? aggregator(b, cb, a, ca) : aggregator(a, ca, b, cb);
  map.set(a, b, agg.common == 0 ? 0.0 : finalize_similarity(agg));
}

SimilarityMap build_similarity(const RatingsByItem& ratings,
                               const PairAggregator& aggregator) {
  // Candidate pairs are those co-rated by at least one user.
  std::map<UserId, std::vector<ItemId>> by_user;
  for (const auto& [item, column] : ratings) {
    for (const auto& [user, rating] : column) by_user[user].push_back(item);
  }
  std::set<std::pair<ItemId, ItemId>> pairs;
  for (const auto& [user, items] : by_user) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        pairs.emplace(std::min(items[i], items[j]), std::max(items[i], items[j]));
      }
    }
  }
  SimilarityMap map;
  for (const auto& [item, column] : ratings) map.add_item(item);
  for (const auto& [a, b] : pairs) refresh_pair(map, ratings, a, b, aggregator);
  return map;
}

SimilarityMap build_similarity(const std::vector<RatingRecord>& records) {
  return build_similarity(ratings_by_item(records));
}

}  // namespace stopaudit
