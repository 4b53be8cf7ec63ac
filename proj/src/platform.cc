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

#include "stopaudit/platform.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace stopaudit {

std::string to_string(PlatformMode mode) {
  return mode == PlatformMode::kHonest ? "honest" : "violating";
}

PlatformMode parse_platform_mode(const std::string& name) {
  if (name == "honest") return PlatformMode::kHonest;
  if (name == "violating") return PlatformMode::kViolating;
  throw Error("unknown platform mode '" + name + "'");
}

void PlatformConfig::validate() const {
  if (cluster_size == 0) throw Error("cluster_size_S must be positive");
  if (disclose_k == 0) throw Error("disclose_k must be positive");
  if (disclose_k > cluster_size) throw Error("disclose_k exceeds cluster_size_S");
}

namespace {

bool in_history(const History& history, const ItemId& item) {
  return std::any_of(history.begin(), history.end(),
                     [&](const HistoryEntry& e) { return e.item == item; });
}

}  // namespace

double score_item(const History& history, const SimilarityMap& map,
                  const ItemId& candidate) {
  if (in_history(history, candidate)) {
    throw Error("candidate " + candidate + " is already in the history");
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& h : history) {
    const double s = map.similarity(h.item, candidate);
    num += s * h.rating;
    den += std::abs(s);
  }
  return den == 0.0 ? 0.0 : num / den;
}

std::vector<ItemId> rank_cluster(const History& history,
                                 const SimilarityMap& map, std::size_t size) {
  std::set<ItemId> owned;
  for (const auto& h : history) owned.insert(h.item);

  // Accumulate in history order so each candidate's sums match score_item.
  std::map<ItemId, std::pair<double, double>> acc;
  for (const auto& h : history) {
    for (const auto& [other, s] : map.row(h.item)) {
      if (owned.count(other)) continue;
      auto& [num, den] = acc[other];
      num += s * h.rating;
      den += std::abs(s);
    }
  }
  std::vector<std::pair<double, ItemId>> scored;
  scored.reserve(acc.size());
  for (const auto& [item, nd] : acc) {
    const double score = nd.second == 0.0 ? 0.0 : nd.first / nd.second;
    if (score > 0.0) scored.emplace_back(score, item);
  }
  auto better = [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  };
  const std::size_t keep = std::min(size, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), better);
  std::vector<ItemId> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(std::move(scored[i].second));
  return out;
}

std::vector<ItemId> disclose(const std::vector<ItemId>& cluster, std::size_t k,
                             Rng& rng) {
  if (k >= cluster.size()) return cluster;
  std::vector<ItemId> out;
  out.reserve(k);
  for (std::size_t i : rng.sample_indices(cluster.size(), k)) {
    out.push_back(cluster[i]);
  }
  return out;
}

Platform::Platform(PlatformConfig config)
    : config_(config), rng_(derive_seed(config.seed, "platform")) {
  config_.validate();
}

bool Platform::is_active(const UserId& user, Seq seq) const {
  if (config_.mode == PlatformMode::kViolating) return true;
  auto it = stops_.find(user);
  return it == stops_.end() || seq > it->second;
}

Disclosure Platform::record_purchase(const UserId& user, const ItemId& item,
                                     double rating) {
  if (!(rating > 0.0) || rating > 1.0) {
    throw Error("rating must be in (0, 1]");
  }
  History& hist = histories_[user];
  if (in_history(hist, item)) {
    throw Error("duplicate purchase of " + item + " by " + user);
  }
  const Seq seq = clock_++;
  hist.push_back({item, rating, seq});
  map_.add_item(item);
  active_[item][user] = rating;
  for (const auto& prior : hist) {
    if (prior.item == item || !is_active(user, prior.seq)) continue;
    refresh_pair(map_, active_, item, prior.item, plaintext_aggregator());
  }
  Disclosure d;
  d.user = user;
  d.trigger_seq = seq;
  d.items = disclose(full_recommendation_cluster(user), config_.disclose_k, rng_);
  return d;
}

Seq Platform::stop_request(const UserId& user) {
  if (!has_user(user)) throw Error("stop request from unknown user " + user);
  const Seq seq = clock_++;
  if (config_.mode == PlatformMode::kViolating) {
    stops_[user] = seq;
    return seq;
  }
  // Records still feeding the map before this request are exactly the ones
  // it removes.
  std::vector<ItemId> removed;
  for (const auto& h : histories_.at(user)) {
    if (is_active(user, h.seq)) removed.push_back(h.item);
  }
  stops_[user] = seq;
  for (const auto& item : removed) {
    auto it = active_.find(item);
    it->second.erase(user);
    if (it->second.empty()) active_.erase(it);
  }
  for (std::size_t i = 0; i < removed.size(); ++i) {
    for (std::size_t j = i + 1; j < removed.size(); ++j) {
      refresh_pair(map_, active_, removed[i], removed[j], plaintext_aggregator());
    }
  }
  return seq;
}

History Platform::effective_history(const UserId& user) const {
  auto it = histories_.find(user);
  if (it == histories_.end()) return {};
  History out;
  for (const auto& h : it->second) {
    if (is_active(user, h.seq)) out.push_back(h);
  }
  return out;
}

std::vector<ItemId> Platform::full_recommendation_cluster(
    const UserId& user) const {
  History h = effective_history(user);
  if (h.empty()) throw Error("user " + user + " has no effective history");
  return rank_cluster(h, map_, config_.cluster_size);
}

const History& Platform::history(const UserId& user) const {
  static const History kEmpty;
  auto it = histories_.find(user);
  return it == histories_.end() ? kEmpty : it->second;
}

std::optional<Seq> Platform::stop_seq(const UserId& user) const {
  auto it = stops_.find(user);
  if (it == stops_.end()) return std::nullopt;
  return it->second;
}

}  // namespace stopaudit
