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

#ifndef STOPAUDIT_COMMUNITY_H_
#define STOPAUDIT_COMMUNITY_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stopaudit/similarity.h"
#include "stopaudit/types.h"

namespace stopaudit {

// How a member first entered a per-item cluster. A member keeps the tag of
// its earliest insertion.
enum class Provenance { kInit, kUpdate, kGrown };

std::string to_string(Provenance tag);
Provenance parse_provenance(const std::string& name);

struct PerItemCluster {
  ItemId anchor;
  std::map<ItemId, Provenance> members;

  ItemSet items() const;
  bool has_tag(Provenance tag) const;
};

// Immutable copy of a cluster.
struct ClusterSnapshot {
  ItemId anchor;
  ItemSet members;
  std::map<Provenance, ItemSet> by_tag;

  bool operator==(const ClusterSnapshot&) const = default;
};

// One platform response seen by the community. `contained` records whether
// every disclosed item was already in the purchased item's cluster before
// the disclosure was merged.
struct Observation {
  UserId user;
  ItemId item;
  Seq seq = 0;
  std::vector<ItemId> disclosed;
  bool first_purchase = false;
  bool contained = false;

  bool operator==(const Observation&) const = default;
};

enum class UserGroup { kGroupOne, kGroupTwo };

std::string to_string(UserGroup group);

// The Web3 community's evidence state: an auxiliary similarity map over
// members' records, per-item clusters with provenance, and the log of
// recommendations members received.
//
// An oracle community (see bind_reference_map) runs the same cluster
// operations but reads similarities from the platform's real map instead of
// maintaining its own.
class Community {
 public:
  explicit Community(std::set<UserId> members,
                     PairAggregator aggregator = plaintext_aggregator());

  // Uses `real` for every similarity lookup and merges its neighbourhoods
  // into clusters. The map must outlive this community's updates.
  void bind_reference_map(const SimilarityMap* real) { reference_ = real; }
  bool is_oracle() const { return reference_ != nullptr; }

  // Builds the initial map and clusters from members' pre-existing
  // purchases. Every record must belong to a member.
  void init_from_histories(const std::vector<RatingRecord>& records);

  // Applies the update and growing operations for a member's purchase of
  // `item` and the platform's response to it.
  void on_member_purchase(const UserId& user, const ItemId& item,
                          double rating, Seq seq,
                          const std::vector<ItemId>& disclosed);

  void on_stop_request(const UserId& user, Seq seq);

  // Logs a probing purchase without feeding it into cluster maintenance.
  void record_probe(const UserId& user, const ItemId& item, Seq seq,
                    const std::vector<ItemId>& disclosed);

  UserGroup classify_user(const UserId& user) const;

  // Union of {x} and cluster(x) over the member's pre-request purchases.
  ItemSet history_cluster(const UserId& user) const;

  ClusterSnapshot cluster_snapshot(const ItemId& item) const;

  // Merges the reference map's current neighbourhood of every clustered
  // item. Oracle communities only.
  void sync_with_reference();

  bool is_member(const UserId& user) const { return members_.count(user) > 0; }
  const std::set<UserId>& members() const { return members_; }

  // Similarity used for criteria: the reference map for oracles, the
  // auxiliary map otherwise.
  const SimilarityMap& similarity_view() const {
    return reference_ ? *reference_ : aux_;
  }
  const SimilarityMap& aux_map() const { return aux_; }
  const RatingsByItem& member_ratings() const { return raters_; }
  const std::map<ItemId, PerItemCluster>& clusters() const { return clusters_; }
  bool has_cluster(const ItemId& item) const { return clusters_.count(item) > 0; }

  const History& history(const UserId& user) const;
  // Purchases made before the member's latest stop request (all of them if
  // there is none).
  History pre_request_history(const UserId& user) const;
  std::optional<Seq> stop_seq(const UserId& user) const;
  std::optional<ItemId> first_purchase(const UserId& user) const;
  const std::map<UserId, ItemId>& first_purchases() const { return first_purchase_; }

  const std::vector<Observation>& observations() const { return observed_; }
  std::vector<const Observation*> observations_for_item(const ItemId& item) const;
  std::vector<const Observation*> observations_for_user(const UserId& user) const;
  const std::vector<Observation>& probes() const { return probes_; }

  // Restores a state exported by the judge-facing serializer. Validates
  // the structural invariants and throws DataError on violation.
  static Community restore(std::set<UserId> members, SimilarityMap aux,
                           std::map<ItemId, PerItemCluster> clusters,
                           std::map<UserId, History> histories,
                           std::map<UserId, Seq> stops,
                           std::vector<Observation> observed,
                           std::vector<Observation> probes);

  const std::map<UserId, History>& histories() const { return histories_; }
  const std::map<UserId, Seq>& stops() const { return stops_; }

 private:
  PerItemCluster& cluster_of(const ItemId& item);
  bool insert_member(const ItemId& anchor, const ItemId& item, Provenance tag);
  void merge_reference_neighbours(const ItemId& item, Provenance tag);

  std::set<UserId> members_;
  PairAggregator aggregator_;
  const SimilarityMap* reference_ = nullptr;

  SimilarityMap aux_;
  RatingsByItem raters_;
  std::map<ItemId, PerItemCluster> clusters_;
  std::map<ItemId, ItemSet> containing_;  // item -> anchors whose cluster has it
  std::map<UserId, History> histories_;
  std::map<UserId, ItemId> first_purchase_;
  std::map<UserId, Seq> stops_;
  std::vector<Observation> observed_;
  std::map<ItemId, std::vector<std::size_t>> observed_by_item_;
  std::map<UserId, std::vector<std::size_t>> observed_by_user_;
  std::vector<Observation> probes_;
};

}  // namespace stopaudit

#endif  // STOPAUDIT_COMMUNITY_H_
