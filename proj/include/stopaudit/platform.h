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

#ifndef STOPAUDIT_PLATFORM_H_
#define STOPAUDIT_PLATFORM_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stopaudit/rng.h"
#include "stopaudit/similarity.h"
#include "stopaudit/types.h"

namespace stopaudit {

enum class PlatformMode { kHonest, kViolating };

std::string to_string(PlatformMode mode);
PlatformMode parse_platform_mode(const std::string& name);

struct PlatformConfig {
  PlatformMode mode = PlatformMode::kHonest;
  std::size_t cluster_size = 10;  // S: size of the full recommendation cluster
  std::size_t disclose_k = 7;     // items shown per response, k <= S
  std::uint64_t seed = 0;

  void validate() const;
};

// What the platform shows a user after a purchase.
struct Disclosure {
  UserId user;
  Seq trigger_seq = 0;
  std::vector<ItemId> items;  // in cluster rank order

  bool operator==(const Disclosure&) const = default;
};

// Item-based CF score of `candidate` for a user with `history`:
//   sum_b s(b, c) * r_b / sum_b |s(b, c)|, and 0 when the denominator is 0.
// Throws if the candidate is already in the history.
double score_item(const History& history, const SimilarityMap& map,
                  const ItemId& candidate);

// Top `size` positive-score items outside `history`, by score descending
// then id ascending.
std::vector<ItemId> rank_cluster(const History& history,
                                 const SimilarityMap& map, std::size_t size);

// Uniform k-subset of `cluster`, keeping cluster order. k >= |cluster|
// returns the whole cluster.
std::vector<ItemId> disclose(const std::vector<ItemId>& cluster, std::size_t k,
                             Rng& rng);

// Simulated collaborative-filtering platform. Copyable: a copy is an
// independent fork sharing nothing mutable.
//
// Honest mode removes every record a user made before their latest stop
// request from both the similarity map and the user's effective history.
// Violating mode logs the request and changes nothing else.
class Platform {
 public:
  explicit Platform(PlatformConfig config);

  // Appends the purchase at the next logical seq, updates the real map for
  // every pair it touches, and returns the disclosed part of the user's new
  // recommendation cluster.
  Disclosure record_purchase(const UserId& user, const ItemId& item,
                             double rating);

  // Returns the seq assigned to the request.
  Seq stop_request(const UserId& user);

  History effective_history(const UserId& user) const;

  // The full R cluster for the user's current effective history.
  std::vector<ItemId> full_recommendation_cluster(const UserId& user) const;

  const History& history(const UserId& user) const;
  bool has_user(const UserId& user) const { return histories_.count(user) > 0; }
  std::optional<Seq> stop_seq(const UserId& user) const;

  const SimilarityMap& real_map() const { return map_; }
  const RatingsByItem& active_ratings() const { return active_; }
  const PlatformConfig& config() const { return config_; }
  Seq clock() const { return clock_; }

 private:
  bool is_active(const UserId& user, Seq seq) const;

  PlatformConfig config_;
  SimilarityMap map_;
  RatingsByItem active_;  // records that currently feed map_
  std::map<UserId, History> histories_;
  std::map<UserId, Seq> stops_;
  Rng rng_;
  Seq clock_ = 0;
};

}  // namespace stopaudit

#endif  // STOPAUDIT_PLATFORM_H_
