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

#include "stopaudit/community.h"

#include <algorithm>

namespace stopaudit {

std::string to_string(Provenance tag) {
  switch (tag) {
    case Provenance::kInit:
      return "init";
    case Provenance::kUpdate:
      return "update";
    case Provenance::kGrown:
      return "grown";
  }
  return "?";
}

Provenance parse_provenance(const std::string& name) {
  if (name == "init") return Provenance::kInit;
  if (name == "update") return Provenance::kUpdate;
  if (name == "grown") return Provenance::kGrown;
  throw DataError("unknown provenance tag '" + name + "'");
}

std::string to_string(UserGroup group) {
  return group == UserGroup::kGroupOne ? "group_one" : "group_two";
}

ItemSet PerItemCluster::items() const {
  ItemSet out;
  for (const auto& [item, tag] : members) out.insert(item);
  return out;
}

bool PerItemCluster::has_tag(Provenance tag) const {
  return std::any_of(members.begin(), members.end(),
                     [tag](const auto& m) { return m.second == tag; });
}

Community::Community(std::set<UserId> members, PairAggregator aggregator)
    : members_(std::move(members)), aggregator_(std::move(aggregator)) {}

PerItemCluster& Community::cluster_of(const ItemId& item) {
  auto [it, inserted] = clusters_.try_emplace(item);
  if (inserted) it->second.anchor = item;
  return it->second;
}

bool Community::insert_member(const ItemId& anchor, const ItemId& item,
                              Provenance tag) {
  if (anchor == item) return false;
  auto [it, inserted] = cluster_of(anchor).members.try_emplace(item, tag);
  if (inserted) containing_[item].insert(anchor);
  return inserted;
}

void Community::merge_reference_neighbours(const ItemId& item, Provenance tag) {
  cluster_of(item);
  for (const auto& [other, s] : reference_->row(item)) {
    insert_member(item, other, tag);
  }
}

void Community::init_from_histories(const std::vector<RatingRecord>& records) {
  std::vector<RatingRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.seq < b.seq; });
  for (const auto& r : sorted) {
    if (!is_member(r.user)) throw Error("initial record of non-member " + r.user);
    auto& hist = histories_[r.user];
    if (hist.empty()) first_purchase_[r.user] = r.item;
    hist.push_back({r.item, r.rating, r.seq});
    raters_[r.item][r.user] = r.rating;
  }
  if (reference_) {
    for (const auto& [item, column] : raters_) {
      merge_reference_neighbours(item, Provenance::kInit);
    }
    return;
  }
  aux_ = build_similarity(raters_, aggregator_);
  for (const auto& item : aux_.universe()) {
    cluster_of(item);
    for (const auto& [other, s] : aux_.row(item)) {
      insert_member(item, other, Provenance::kInit);
    }
  }
}

void Community::on_member_purchase(const UserId& user, const ItemId& item,
                                   double rating, Seq seq,
                                   const std::vector<ItemId>& disclosed) {
  if (!is_member(user)) throw Error("purchase by non-member " + user);
  History& hist = histories_[user];
  for (const auto& h : hist) {
    if (h.item == item) throw Error("duplicate purchase of " + item + " by " + user);
  }
  const bool first = hist.empty();

  if (reference_) merge_reference_neighbours(item, Provenance::kUpdate);

  Observation obs;
  obs.user = user;
  obs.item = item;
  obs.seq = seq;
  obs.disclosed = disclosed;
  obs.first_purchase = first;
  {
    auto it = clusters_.find(item);
    obs.contained = std::all_of(disclosed.begin(), disclosed.end(),
                                [&](const ItemId& d) {
                                  return it != clusters_.end() &&
                                         it->second.members.count(d) > 0;
                                });
  }

  raters_[item][user] = rating;
  aux_.add_item(item);
  cluster_of(item);
  if (!first) {
    // Case 2: refresh aux similarities against the buyer's earlier items,
    // then cross-merge the history.
    if (!reference_) {
      for (const auto& p : hist) refresh_pair(aux_, raters_, item, p.item, aggregator_);
    }
    for (const auto& p : hist) insert_member(item, p.item, Provenance::kUpdate);
    for (const auto& p : hist) {
      insert_member(p.item, item, Provenance::kUpdate);
      for (const auto& q : hist) insert_member(p.item, q.item, Provenance::kUpdate);
    }
  }
  // Case 1 and the tail of Case 2: merge the new recommendations into the
  // purchased item's cluster.
  for (const auto& d : disclosed) insert_member(item, d, Provenance::kUpdate);

  // Growing: every other cluster that contains the purchased item absorbs
  // the new recommendations.
  auto holders = containing_.find(item);
  if (holders != containing_.end()) {
    const ItemSet anchors = holders->second;
    for (const auto& anchor : anchors) {
      if (anchor == item) continue;
      for (const auto& d : disclosed) insert_member(anchor, d, Provenance::kGrown);
    }
  }

  if (first) first_purchase_[user] = item;
  hist.push_back({item, rating, seq});
  observed_by_item_[item].push_back(observed_.size());
  observed_by_user_[user].push_back(observed_.size());
  observed_.push_back(std::move(obs));
}

void Community::on_stop_request(const UserId& user, Seq seq) {
  if (!is_member(user)) throw Error("stop request from non-member " + user);
  stops_[user] = seq;
}

void Community::record_probe(const UserId& user, const ItemId& item, Seq seq,
                             const std::vector<ItemId>& disclosed) {
  Observation obs;
  obs.user = user;
  obs.item = item;
  obs.seq = seq;
  obs.disclosed = disclosed;
  auto it = clusters_.find(item);
  obs.contained = std::all_of(disclosed.begin(), disclosed.end(), [&](const ItemId& d) {
    return it != clusters_.end() && it->second.members.count(d) > 0;
  });
  probes_.push_back(std::move(obs));
}

UserGroup Community::classify_user(const UserId& user) const {
  if (!is_member(user)) throw Error("classify of non-member " + user);
  auto it = observed_by_user_.find(user);
  if (it == observed_by_user_.end() || it->second.empty()) {
    throw Error("member " + user + " has no observed recommendations");
  }
  for (std::size_t idx : it->second) {
    if (!observed_[idx].contained) return UserGroup::kGroupTwo;
  }
  return UserGroup::kGroupOne;
}

ItemSet Community::history_cluster(const UserId& user) const {
  if (!is_member(user)) throw Error("history cluster of non-member " + user);
  ItemSet out;
  for (const auto& h : pre_request_history(user)) {
    out.insert(h.item);
    auto it = clusters_.find(h.item);
    if (it == clusters_.end()) continue;
    for (const auto& [m, tag] : it->second.members) out.insert(m);
  }
  return out;
}

ClusterSnapshot Community::cluster_snapshot(const ItemId& item) const {
  auto it = clusters_.find(item);
  if (it == clusters_.end()) throw Error("no cluster for item " + item);
  ClusterSnapshot snap;
  snap.anchor = item;
  for (const auto& [m, tag] : it->second.members) {
    snap.members.insert(m);
    snap.by_tag[tag].insert(m);
  }
  return snap;
}

void Community::sync_with_reference() {
  if (!reference_) throw Error("sync_with_reference needs a reference map");
  std::vector<ItemId> anchors;
  for (const auto& [item, c] : clusters_) anchors.push_back(item);
  for (const auto& item : anchors) merge_reference_neighbours(item, Provenance::kUpdate);
}

const History& Community::history(const UserId& user) const {
  static const History kEmpty;
  auto it = histories_.find(user);
  return it == histories_.end() ? kEmpty : it->second;
}

History Community::pre_request_history(const UserId& user) const {
  const History& all = history(user);
  auto stop = stops_.find(user);
  if (stop == stops_.end()) return all;
  History out;
  for (const auto& h : all) {
    if (h.seq < stop->second) out.push_back(h);
  }
  return out;
}

std::optional<Seq> Community::stop_seq(const UserId& user) const {
  auto it = stops_.find(user);
  if (it == stops_.end()) return std::nullopt;
  return it->second;
}

std::optional<ItemId> Community::first_purchase(const UserId& user) const {
  auto it = first_purchase_.find(user);
  if (it == first_purchase_.end()) return std::nullopt;
  return it->second;
}

std::vector<const Observation*> Community::observations_for_item(
    const ItemId& item) const {
  std::vector<const Observation*> out;
  auto it = observed_by_item_.find(item);
  if (it == observed_by_item_.end()) return out;
  for (std::size_t idx : it->second) out.push_back(&observed_[idx]);
  return out;
}

std::vector<const Observation*> Community::observations_for_user(
    const UserId& user) const {
  std::vector<const Observation*> out;
  auto it = observed_by_user_.find(user);
  if (it == observed_by_user_.end()) return out;
  for (std::size_t idx : it->second) out.push_back(&observed_[idx]);
  return out;
}

Community Community::restore(std::set<UserId> members, SimilarityMap aux,
                             std::map<ItemId, PerItemCluster> clusters,
                             std::map<UserId, History> histories,
                             std::map<UserId, Seq> stops,
                             std::vector<Observation> observed,
                             std::vector<Observation> probes) {
  Community c(std::move(members));
  c.aux_ = std::move(aux);
  for (auto& [item, cluster] : clusters) {
    if (cluster.anchor != item) throw DataError("cluster anchor mismatch for " + item);
    if (cluster.members.count(item)) throw DataError("cluster " + item + " contains its anchor");
    for (const auto& [m, tag] : cluster.members) c.containing_[m].insert(item);
  }
  c.clusters_ = std::move(clusters);
  for (auto& [user, hist] : histories) {
    if (!c.is_member(user)) throw DataError("history for non-member " + user);
    if (hist.empty()) continue;
    c.first_purchase_[user] = hist.front().item;
    for (const auto& h : hist) c.raters_[h.item][user] = h.rating;
  }
  c.histories_ = std::move(histories);
  c.stops_ = std::move(stops);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    c.observed_by_item_[observed[i].item].push_back(i);
    c.observed_by_user_[observed[i].user].push_back(i);
  }
  c.observed_ = std::move(observed);
  c.probes_ = std::move(probes);
  return c;
}

}  // namespace stopaudit
