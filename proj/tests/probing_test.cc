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

#include "stopaudit/probing.h"

#include <algorithm>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace stopaudit {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;
using testing::toy_platform;
using testing::toy_replay;

ItemSet items(std::initializer_list<const char*> ids) { return ItemSet(ids.begin(), ids.end()); }

ItemSet numbered(const std::string& prefix, int n) {
  ItemSet out;
  for (int i = 0; i < n; ++i) out.insert(prefix + std::to_string(i));
  return out;
}

// Brute |A u B| > S.
bool union_rule(const ItemSet& a, const ItemSet& b, std::size_t s) {
  ItemSet u = a;
  u.insert(b.begin(), b.end());
  return u.size() > s;
}

TEST(Lemma, Examples) {
  // S = 10, seven disclosed, four of A hidden: 4 > 3.
  EXPECT_TRUE(lemma_check(numbered("a", 4), numbered("b", 7), 10));
  // Three hidden is consistent with an honest cluster.
  EXPECT_FALSE(lemma_check(numbered("a", 3), numbered("b", 7), 10));
  // A inside B never fires.
  EXPECT_FALSE(lemma_check(items({"b0", "b1"}), numbered("b", 7), 10));
  EXPECT_FALSE(lemma_check({}, numbered("b", 7), 10));
  EXPECT_FALSE(lemma_check({}, {}, 10));
  EXPECT_THROW(lemma_check({}, numbered("b", 11), 10), Error);
}

TEST(Lemma, EquivalentToUnionRule) {
  Rng rng(17);
  for (int t = 0; t < 5000; ++t) {
    const std::size_t s = 1 + rng.uniform_below(12);
    ItemSet a, b;
    const std::size_t nb = rng.uniform_below(s + 1);
    while (b.size() < nb) b.insert("i" + std::to_string(rng.uniform_below(20)));
    const std::size_t na = rng.uniform_below(15);
    for (std::size_t i = 0; i < na; ++i) a.insert("i" + std::to_string(rng.uniform_below(20)));
    EXPECT_EQ(lemma_check(a, b, s), union_rule(a, b, s));
  }
}

TEST(Overlap, Examples) {
  EXPECT_EQ(overlap_check(items({"a", "b", "c"}), items({"b", "x"})), items({"b"}));
  EXPECT_THAT(overlap_check(items({"a"}), items({"x"})), IsEmpty());
  EXPECT_THAT(overlap_check({}, items({"x"})), IsEmpty());
}

TEST(SelectionOptions, LemmaWindow) {
  auto o = SelectionOptions::lemma_window(10, 7);
  EXPECT_EQ(o.min_cluster, 4u);
  EXPECT_EQ(o.max_cluster, 10u);
  EXPECT_THROW(SelectionOptions::lemma_window(5, 6), Error);
}

TEST(Criteria, C1ExcludesVictimsOwnFirstPurchase) {
  Community c(std::set<UserId>{"m1", "m2"});
  c.on_member_purchase("m1", "a", 1.0, 0, {});
  c.on_member_purchase("m2", "q", 1.0, 1, {});
  EXPECT_FALSE(evaluate_criteria(c, UserId("m1"), "a").c1);
  EXPECT_EQ(evaluate_criteria(c, UserId("m1"), "a").first_failure(), "C1");
  EXPECT_TRUE(evaluate_criteria(c, UserId("m2"), "a").c1);
  EXPECT_TRUE(evaluate_criteria(c, std::nullopt, "a").c1);
  EXPECT_FALSE(evaluate_criteria(c, UserId("m2"), "zz").c1);
}

TEST(Criteria, C4RejectsItemsNearVictimHistory) {
  Community c(std::set<UserId>{"m1", "m2"});
  c.on_member_purchase("m1", "a", 1.0, 0, {});
  c.on_member_purchase("m1", "h", 1.0, 1, {});  // sim(a, h) > 0
  c.on_member_purchase("m2", "h", 1.0, 2, {});
  EXPECT_FALSE(evaluate_criteria(c, UserId("m2"), "a").c4);
  EXPECT_EQ(evaluate_criteria(c, UserId("m2"), "a").first_failure(), "C4");
  EXPECT_TRUE(evaluate_criteria(c, std::nullopt, "a").c4);
}

TEST(Criteria, C3RejectsGrownClusters) {
  Community c(std::set<UserId>{"m1", "m2"});
  c.on_member_purchase("m1", "b", 1.0, 0, {"a"});
  c.on_member_purchase("m2", "a", 1.0, 1, {"z"});  // z grows into b
  auto check = evaluate_criteria(c, std::nullopt, "b");
  EXPECT_TRUE(check.c1);
  EXPECT_FALSE(check.c3);
  EXPECT_EQ(check.first_failure(), "C3");
  EXPECT_TRUE(evaluate_criteria(c, std::nullopt, "a").c3);
}

TEST(Criteria, C2RejectsDisclosuresOutsideTheMapCluster) {
  Community c(std::set<UserId>{"m1", "m2"});
  c.on_member_purchase("m1", "a", 1.0, 0, {"x"});  // nobody links a and x
  c.on_member_purchase("m2", "b", 1.0, 1, {});
  auto check = evaluate_criteria(c, std::nullopt, "a");
  EXPECT_TRUE(check.c3);
  EXPECT_FALSE(check.c2);
  EXPECT_EQ(check.first_failure(), "C2");
  EXPECT_TRUE(evaluate_criteria(c, std::nullopt, "b").c2);
}

TEST(Criteria, SizeWindow) {
  auto r = toy_replay(PlatformMode::kViolating);
  EXPECT_TRUE(evaluate_criteria(*r.community, UserId("v"), "t",
                                SelectionOptions::lemma_window(2, 1)).passes());
  SelectionOptions tight;
  tight.max_cluster = 1;
  auto check = evaluate_criteria(*r.community, UserId("v"), "t", tight);
  EXPECT_FALSE(check.size_ok);
  EXPECT_EQ(check.first_failure(), "size");
}

TEST(Selection, ToyTargetIsT) {
  auto r = toy_replay(PlatformMode::kHonest);
  auto targets = select_target_items(*r.community, UserId("v"));
  ASSERT_EQ(targets.size(), 1u);
  EXPECT_EQ(targets[0].item, "t");
  EXPECT_EQ(targets[0].cluster.members, items({"z1", "z2"}));
  EXPECT_TRUE(targets[0].owner == "o" || targets[0].owner == "x1" || targets[0].owner == "x2");
}

TEST(Selection, SortedAndPassing) {
  SynthParams p;
  p.n_users = 80;
  p.n_items = 300;
  p.n_records = 500;
  p.seed = 3;
  const auto recs = synthesize_dataset(p);
  std::set<UserId> members;
  for (const auto& r : recs) members.insert(r.user);
  auto replay = run_replay(recs, members, PlatformConfig{}, BackendConfig{}, false);
  const UserId victim = *members.begin();
  auto targets = select_target_items(*replay.community, victim);
  for (std::size_t i = 1; i < targets.size(); ++i) EXPECT_LT(targets[i - 1].item, targets[i].item);
  for (const auto& t : targets) {
    EXPECT_TRUE(evaluate_criteria(*replay.community, victim, t.item).passes());
    EXPECT_NE(t.owner, victim);
  }
}

TEST(ProbeUntilSuccess, ViolatingToyProvenInFirstRound) {
  auto r = toy_replay(PlatformMode::kViolating);
  Rng rng(3);
  auto out = probe_until_success(*r.platform, *r.community, r.ledger.get(), "v", 5, rng,
                                 SelectionOptions::lemma_window(2, 1));
  EXPECT_EQ(out.status, ProbeStatus::kViolationProven);
  EXPECT_EQ(out.rounds_used, 1);
  ASSERT_EQ(out.evidences.size(), 1u);
  const Evidence& e = out.evidences[0];
  EXPECT_EQ(e.probe, "t");
  EXPECT_EQ(e.a, items({"z1", "z2"}));
  ASSERT_EQ(e.b.size(), 1u);
  EXPECT_TRUE(e.b[0] == "c1" || e.b[0] == "c2");
  EXPECT_EQ(e.s, 2u);
  EXPECT_EQ(e.undisclosed, 1u);
  EXPECT_TRUE(e.lemma_triggered);
  EXPECT_THAT(e.overlap, IsEmpty());
  ASSERT_EQ(e.ledger_refs.size(), 4u);
  const auto& entries = r.ledger->entries();
  EXPECT_EQ(entries[e.ledger_refs[0]].kind, EntryKind::kStopRequest);
  EXPECT_EQ(entries[e.ledger_refs[1]].kind, EntryKind::kClusterSnapshot);
  EXPECT_EQ(entries[e.ledger_refs[2]].kind, EntryKind::kPurchase);
  EXPECT_EQ(entries[e.ledger_refs[3]].kind, EntryKind::kDisclosure);
  EXPECT_EQ(entries[*out.community_ref].kind, EntryKind::kCommunityState);
  EXPECT_TRUE(verify_chain(r.ledger->chain()).valid);
}

TEST(ProbeUntilSuccess, HonestToyNeverTriggers) {
  auto r = toy_replay(PlatformMode::kHonest);
  Rng rng(3);
  auto out = probe_until_success(*r.platform, *r.community, r.ledger.get(), "v", 5, rng,
                                 SelectionOptions::lemma_window(2, 1));
  EXPECT_EQ(out.status, ProbeStatus::kExhausted);
  ASSERT_EQ(out.evidences.size(), 1u);
  EXPECT_FALSE(out.evidences[0].lemma_triggered);
  EXPECT_THAT(out.evidences[0].b, ::testing::Each(::testing::AnyOf("z1", "z2")));
}

// Four independent copies of the toy's target side.
std::vector<RatingRecord> four_targets() {
  std::vector<std::tuple<std::string, std::string, double>> rows;
  for (int j = 0; j < 4; ++j) {
    const std::string t = "t" + std::to_string(j), s = std::to_string(j);
    rows.push_back({"o" + s, t, 1.0});
    rows.push_back({"x" + s + "a", t, 1.0});
    rows.push_back({"x" + s + "a", "z" + s + "a", 1.0});
    rows.push_back({"x" + s + "b", t, 1.0});
    rows.push_back({"x" + s + "b", "z" + s + "b", 1.0});
  }
  rows.push_back({"v", "h", 1.0});
  return testing::seq_records(rows);
}

TEST(ProbeUntilSuccess, InconclusiveAfterMaxRounds) {
  const auto recs = four_targets();
  std::set<UserId> members;
  for (const auto& r : recs) members.insert(r.user);
  auto r = run_replay(recs, members, toy_platform(PlatformMode::kHonest), BackendConfig{});
  ASSERT_EQ(select_target_items(*r.community, UserId("v")).size(), 4u);
  Rng rng(1);
  auto out = probe_until_success(*r.platform, *r.community, r.ledger.get(), "v", 3, rng);
  EXPECT_EQ(out.status, ProbeStatus::kInconclusive);
  EXPECT_EQ(out.rounds_used, 3);
  EXPECT_EQ(out.evidences.size(), 3u);
  std::set<ItemId> probed;
  for (const auto& e : out.evidences) probed.insert(e.probe);
  EXPECT_EQ(probed.size(), 3u);
  // One stop request up front, renewed before rounds 2 and 3.
  std::size_t stops = 0;
  for (const auto& e : r.ledger->entries()) stops += e.kind == EntryKind::kStopRequest;
  EXPECT_EQ(stops, 3u);
  EXPECT_EQ(out.evidences[2].round, 3);
}

TEST(ProbeUntilSuccess, NoTargetsExhaustsWithoutRounds) {
  Platform p(toy_platform(PlatformMode::kViolating));
  p.record_purchase("v", "h", 1.0);
  Community c(std::set<UserId>{"v"});
  c.on_member_purchase("v", "h", 1.0, 0, {});
  Rng rng(1);
  auto out = probe_until_success(p, c, nullptr, "v", 10, rng);
  EXPECT_EQ(out.status, ProbeStatus::kExhausted);
  EXPECT_EQ(out.rounds_used, 0);
  EXPECT_THAT(out.evidences, IsEmpty());
  EXPECT_THROW(one_round_success_rate(p, c, "v"), Error);
}

TEST(ProbeUntilSuccess, Errors) {
  auto r = toy_replay(PlatformMode::kViolating);
  Rng rng(1);
  EXPECT_THROW(probe_until_success(*r.platform, *r.community, nullptr, "stranger", 3, rng),
               Error);
  EXPECT_THROW(probe_until_success(*r.platform, *r.community, nullptr, "v", 0, rng), Error);
}

TEST(ProbeUntilSuccess, DeterministicPerSeed) {
  auto run = [] {
    const auto recs = four_targets();
    std::set<UserId> members;
    for (const auto& r : recs) members.insert(r.user);
    auto r = run_replay(recs, members, toy_platform(PlatformMode::kViolating, 4), BackendConfig{});
    Rng rng(9);
    auto out = probe_until_success(*r.platform, *r.community, r.ledger.get(), "v", 4, rng);
    return std::make_pair(out.evidences, r.ledger->head());
  };
  EXPECT_EQ(run(), run());
}

TEST(ProbeRound, ProbeIsLoggedAndBoughtAtRatingOne) {
  auto r = toy_replay(PlatformMode::kViolating);
  issue_stop_request(*r.platform, *r.community, r.ledger.get(), "v");
  const auto before = r.community->history("v");
  probe_round(*r.platform, *r.community, r.ledger.get(), "v", "t", 1);
  EXPECT_EQ(r.platform->history("v").back().item, "t");
  EXPECT_EQ(r.platform->history("v").back().rating, kProbeRating);
  EXPECT_EQ(kProbeRating, 1.0);
  EXPECT_EQ(r.community->history("v"), before);
  ASSERT_EQ(r.community->probes().size(), 1u);
  EXPECT_EQ(r.community->probes()[0].item, "t");
}

TEST(ProbeRound, NeedsCommittedStopWithLedger) {
  auto r = toy_replay(PlatformMode::kViolating);
  EXPECT_THROW(probe_round(*r.platform, *r.community, r.ledger.get(), "v", "t", 1), Error);
}

TEST(OneRoundSuccessRate, ToyRates) {
  auto v = toy_replay(PlatformMode::kViolating);
  const Seq clock = v.platform->clock();
  auto rate = one_round_success_rate(*v.platform, *v.community, "v",
                                     SelectionOptions::lemma_window(2, 1));
  EXPECT_EQ(rate.targets, 1u);
  EXPECT_EQ(rate.triggered, 1u);
  EXPECT_EQ(rate.rate(), 1.0);
  EXPECT_EQ(v.platform->clock(), clock);  // inputs untouched
  EXPECT_FALSE(v.community->stop_seq("v").has_value());

  auto h = toy_replay(PlatformMode::kHonest);
  EXPECT_EQ(one_round_success_rate(*h.platform, *h.community, "v").rate(), 0.0);
  EXPECT_EQ(SuccessRate{}.rate(), 0.0);
}

TEST(ProbeStatus, Names) {
  EXPECT_EQ(to_string(ProbeStatus::kViolationProven), "violation_proven");
  EXPECT_EQ(to_string(ProbeStatus::kInconclusive), "inconclusive");
  EXPECT_EQ(to_string(ProbeStatus::kExhausted), "exhausted");
}

}  // namespace
}  // namespace stopaudit
