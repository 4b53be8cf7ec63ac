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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "stopaudit/ingest.h"
#include "stopaudit/platform.h"
#include "test_util.h"

namespace stopaudit {
namespace {

using ::testing::IsEmpty;
using ::testing::IsSupersetOf;
using ::testing::Pair;
using ::testing::UnorderedElementsAre;
using testing::brute_similarity;
using testing::max_diff;

std::set<UserId> users(std::initializer_list<const char*> ids) {
  return std::set<UserId>(ids.begin(), ids.end());
}

TEST(InitFromHistories, OneNonzeroPair) {
  Community c(users({"m1", "m2"}));
  c.init_from_histories({{"m1", "a", 1, 0}, {"m1", "b", 1, 1}, {"m2", "a", 1, 2}, {"m2", "b", 0.5, 3}});
  EXPECT_THAT(c.clusters().at("a").members, UnorderedElementsAre(Pair("b", Provenance::kInit)));
  EXPECT_THAT(c.clusters().at("b").members, UnorderedElementsAre(Pair("a", Provenance::kInit)));
}

TEST(InitFromHistories, LoneItemHasEmptyCluster) {
  Community c(users({"m1"}));
  c.init_from_histories({{"m1", "a", 1, 0}});
  ASSERT_TRUE(c.has_cluster("a"));
  EXPECT_THAT(c.clusters().at("a").members, IsEmpty());
}

TEST(InitFromHistories, ClustersAreNonzeroNeighbours) {
  SynthParams p;
  p.n_users = 25;
  p.n_items = 40;
  p.n_records = 200;
  p.seed = 12;
  const auto recs = synthesize_dataset(p);
  std::set<UserId> m;
  for (const auto& r : recs) m.insert(r.user);
  Community c(m);
  c.init_from_histories(recs);
  const auto ref = brute_similarity(recs);
  EXPECT_LE(max_diff(c.aux_map(), ref), 1e-12);
  std::map<ItemId, ItemSet> expect;
  for (const auto& r : recs) expect[r.item];
  for (const auto& [k, v] : ref) {
    expect[k.first].insert(k.second);
    expect[k.second].insert(k.first);
  }
  for (const auto& [item, want] : expect) EXPECT_EQ(c.cluster_snapshot(item).members, want);
}

TEST(InitFromHistories, RejectsNonMember) {
  Community c(users({"m1"}));
  EXPECT_THROW(c.init_from_histories({{"x", "a", 1, 0}}), Error);
}

TEST(OnMemberPurchase, CaseOneMergesDisclosure) {
  Community c(users({"m"}));
  c.on_member_purchase("m", "a", 1.0, 0, {"x", "y"});
  EXPECT_THAT(c.clusters().at("a").members,
              IsSupersetOf({Pair("x", Provenance::kUpdate), Pair("y", Provenance::kUpdate)}));
  EXPECT_EQ(c.first_purchase("m"), "a");
  EXPECT_TRUE(c.observations()[0].first_purchase);
}

TEST(OnMemberPurchase, CaseTwoCrossMerges) {
  Community c(users({"m"}));
  c.on_member_purchase("m", "p", 1.0, 0, {});
  c.on_member_purchase("m", "a", 0.8, 1, {});
  EXPECT_TRUE(c.aux_map().has_pair("a", "p"));
  EXPECT_TRUE(c.cluster_snapshot("a").members.count("p"));
  EXPECT_TRUE(c.cluster_snapshot("p").members.count("a"));
  EXPECT_EQ(c.first_purchase("m"), "p");
}

TEST(OnMemberPurchase, CaseTwoUpdatesEveryPriorCluster) {
  Community c(users({"m"}));
  c.on_member_purchase("m", "p", 1.0, 0, {});
  c.on_member_purchase("m", "q", 1.0, 1, {});
  c.on_member_purchase("m", "a", 1.0, 2, {});
  EXPECT_THAT(c.cluster_snapshot("p").members, UnorderedElementsAre("q", "a"));
  EXPECT_THAT(c.cluster_snapshot("q").members, UnorderedElementsAre("p", "a"));
  EXPECT_THAT(c.cluster_snapshot("a").members, UnorderedElementsAre("p", "q"));
}

TEST(OnMemberPurchase, GrowingTagsOtherHolders) {
  Community c(users({"m1", "m2"}));
  c.on_member_purchase("m1", "b", 1.0, 0, {"a"});  // cluster(b) contains a
  c.on_member_purchase("m2", "a", 1.0, 1, {"z"});
  EXPECT_EQ(c.clusters().at("b").members.at("z"), Provenance::kGrown);
  EXPECT_EQ(c.clusters().at("a").members.at("z"), Provenance::kUpdate);
}

TEST(OnMemberPurchase, EarliestTagWins) {
  Community c(users({"m1", "m2", "m3"}));
  c.on_member_purchase("m1", "b", 1.0, 0, {"a"});
  c.on_member_purchase("m2", "a", 1.0, 1, {"z"});  // z grown into b
  c.on_member_purchase("m3", "b", 1.0, 2, {"z"});  // later update of b with z
  EXPECT_EQ(c.clusters().at("b").members.at("z"), Provenance::kGrown);
}

TEST(OnMemberPurchase, ContainedFlagUsesPriorCluster) {
  Community c(users({"m1", "m2"}));
  c.on_member_purchase("m1", "a", 1.0, 0, {"x"});
  c.on_member_purchase("m2", "a", 1.0, 1, {"x"});
  c.on_member_purchase("m2", "b", 1.0, 2, {"y"});
  EXPECT_FALSE(c.observations()[0].contained);  // x entered with this disclosure
  EXPECT_TRUE(c.observations()[1].contained);
  EXPECT_FALSE(c.observations()[2].contained);
}

TEST(OnMemberPurchase, Errors) {
  Community c(users({"m"}));
  EXPECT_THROW(c.on_member_purchase("x", "a", 1.0, 0, {}), Error);
  c.on_member_purchase("m", "a", 1.0, 0, {});
  EXPECT_THROW(c.on_member_purchase("m", "a", 1.0, 1, {}), Error);
}

TEST(ClassifyUser, Definition) {
  Community c(users({"m1", "m2", "m3"}));
  c.on_member_purchase("m1", "a", 1.0, 0, {"x"});
  c.on_member_purchase("m2", "a", 1.0, 1, {"x"});
  EXPECT_EQ(c.classify_user("m2"), UserGroup::kGroupOne);
  EXPECT_EQ(c.classify_user("m1"), UserGroup::kGroupTwo);
  EXPECT_THROW(c.classify_user("m3"), Error);
}

TEST(HistoryCluster, Examples) {
  Community c(users({"m1", "m2"}));
  c.on_member_purchase("m1", "a", 1.0, 0, {"b", "c"});
  EXPECT_EQ(c.history_cluster("m1"), (ItemSet{"a", "b", "c"}));

  // Disjoint per-item sets add up: {a,b,c} and {p,q}.
  std::map<ItemId, PerItemCluster> clusters;
  clusters["a"] = {"a", {{"b", Provenance::kInit}, {"c", Provenance::kInit}}};
  clusters["p"] = {"p", {{"q", Provenance::kInit}}};
  Community d = Community::restore(users({"u"}), SimilarityMap{}, clusters,
                                   {{"u", {{"a", 1.0, 0}, {"p", 1.0, 1}}}}, {}, {}, {});
  EXPECT_EQ(d.history_cluster("u").size(), 3u + 2u);
}

TEST(HistoryCluster, MatchesBruteUnionAndExcludesPostRequest) {
  SynthParams p;
  p.n_users = 30;
  p.n_items = 40;
  p.n_records = 250;
  p.seed = 3;
  auto recs = synthesize_dataset(p);
  std::set<UserId> m;
  for (const auto& r : recs) m.insert(r.user);
  Platform plat(PlatformConfig{});
  Community c(m);
  for (const auto& r : recs) {
    auto d = plat.record_purchase(r.user, r.item, r.rating);
    c.on_member_purchase(r.user, r.item, r.rating, d.trigger_seq, d.items);
  }
  for (const auto& u : m) {
    ItemSet want;
    for (const auto& h : c.history(u)) {
      want.insert(h.item);
      for (const auto& x : c.cluster_snapshot(h.item).members) want.insert(x);
    }
    EXPECT_EQ(c.history_cluster(u), want);
  }
  const UserId u = *m.begin();
  c.on_stop_request(u, 10000);
  c.on_member_purchase(u, "late-item", 1.0, 10001, {});
  EXPECT_EQ(c.pre_request_history(u).size(), c.history(u).size() - 1);
  ItemSet want;
  for (const auto& h : c.pre_request_history(u)) {
    want.insert(h.item);
    for (const auto& x : c.cluster_snapshot(h.item).members) want.insert(x);
  }
  EXPECT_EQ(c.history_cluster(u), want);
}

TEST(ClusterSnapshot, CopySemantics) {
  Community c(users({"m1", "m2"}));
  c.on_member_purchase("m1", "b", 1.0, 0, {"a"});
  const ClusterSnapshot snap = c.cluster_snapshot("b");
  c.on_member_purchase("m2", "a", 1.0, 1, {"z"});
  EXPECT_EQ(snap.members, (ItemSet{"a"}));
  EXPECT_NE(c.cluster_snapshot("b"), snap);
  EXPECT_THROW(c.cluster_snapshot("nope"), Error);
}

TEST(ClusterSnapshot, TagsPartitionMembers) {
  Community c(users({"m1", "m2"}));
  c.init_from_histories({{"m1", "a", 1, 0}, {"m1", "b", 1, 1}});
  c.on_member_purchase("m2", "b", 1.0, 2, {"a", "x"});
  c.on_member_purchase("m2", "x", 1.0, 3, {"y"});
  for (const auto& [anchor, cl] : c.clusters()) {
    auto snap = c.cluster_snapshot(anchor);
    std::size_t total = 0;
    ItemSet uni;
    for (const auto& [tag, items] : snap.by_tag) {
      total += items.size();
      uni.insert(items.begin(), items.end());
    }
    EXPECT_EQ(total, snap.members.size());
    EXPECT_EQ(uni, snap.members);
  }
}

// Replays a synthetic dataset through a platform and a community of a
// sampled membership and checks the community invariants after every step.
TEST(CommunityInvariants, AuxOracleMonotoneAndCovering) {
  SynthParams p;
  p.n_users = 40;
  p.n_items = 60;
  p.n_records = 400;
  p.seed = 17;
  const auto recs = synthesize_dataset(p);
  const auto sample = sample_community(recs, 0.5, 2);
  Platform plat(PlatformConfig{});
  Community c(sample.members);
  std::vector<RatingRecord> member_recs;
  std::map<ItemId, ItemSet> last;
  for (const auto& r : recs) {
    auto d = plat.record_purchase(r.user, r.item, r.rating);
    if (!c.is_member(r.user)) continue;
    c.on_member_purchase(r.user, r.item, r.rating, d.trigger_seq, d.items);
    member_recs.push_back(r);
    ASSERT_LE(max_diff(c.aux_map(), brute_similarity(member_recs)), 1e-12);
    for (const auto& [anchor, cl] : c.clusters()) {
      const ItemSet now = cl.items();
      EXPECT_FALSE(now.count(anchor));
      auto it = last.find(anchor);
      if (it != last.end()) {
        EXPECT_TRUE(std::includes(now.begin(), now.end(), it->second.begin(), it->second.end()));
      }
      last[anchor] = now;
    }
    c.aux_map().for_each_pair([&](const ItemId& a, const ItemId& b, double) {
      EXPECT_TRUE(c.cluster_snapshot(a).members.count(b));
      EXPECT_TRUE(c.cluster_snapshot(b).members.count(a));
    });
  }
}

TEST(Community, OracleReadsReferenceMap) {
  Platform plat(PlatformConfig{});
  Community oracle(users({"m"}));
  oracle.bind_reference_map(&plat.real_map());
  plat.record_purchase("x", "a", 1.0);
  plat.record_purchase("x", "b", 1.0);
  auto d = plat.record_purchase("m", "a", 1.0);
  oracle.on_member_purchase("m", "a", 1.0, d.trigger_seq, d.items);
  EXPECT_TRUE(oracle.cluster_snapshot("a").members.count("b"));
  EXPECT_TRUE(oracle.aux_map().empty());
  EXPECT_EQ(oracle.similarity_view().similarity("a", "b"), 1.0);
}

TEST(Community, ProbesAreLoggedOnly) {
  Community c(users({"m"}));
  c.on_member_purchase("m", "a", 1.0, 0, {"x"});
  const auto before = c.clusters();
  c.record_probe("m", "t", 1, {"y"});
  EXPECT_EQ(c.probes().size(), 1u);
  EXPECT_EQ(c.observations().size(), 1u);
  EXPECT_EQ(c.clusters().size(), before.size());
}

TEST(Provenance, NamesRoundTrip) {
  for (auto t : {Provenance::kInit, Provenance::kUpdate, Provenance::kGrown}) {
    EXPECT_EQ(parse_provenance(to_string(t)), t);
  }
  EXPECT_THROW(parse_provenance("fresh"), DataError);
}

}  // namespace
}  // namespace stopaudit
