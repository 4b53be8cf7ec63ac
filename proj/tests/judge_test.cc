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

#include "stopaudit/judge.h"

#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "stopaudit/harness.h"
#include "stopaudit/serialize.h"
#include "test_util.h"

namespace stopaudit {
namespace {

using testing::toy_replay;

const SelectionOptions kWindow = SelectionOptions::lemma_window(2, 1);

struct Audited {
  ReplayResult replay;
  AuditResult audit;
  JudgeLedger view() const {
    return {audit.ledger.chain(), audit.ledger.entries(), audit.ledger.head()};
  }
  const Evidence& evidence() const { return audit.outcome.evidences.at(0); }
};

Audited audited(PlatformMode mode) {
  Audited a{toy_replay(mode), {}};
  a.audit = audit_victim(a.replay, "v", 5, 1, kWindow);
  return a;
}

EvidenceCheck evidence_with(const Audited& a, const Evidence& e) {
  return verify_evidence(e, a.view(), 2);
}

TEST(VerifyEvidence, UntamperedViolationPasses) {
  auto a = audited(PlatformMode::kViolating);
  ASSERT_EQ(a.audit.checks.size(), 1u);
  const auto& c = a.audit.checks[0];
  EXPECT_TRUE(c.all_passed());
  EXPECT_EQ(c.failed_check(), "");
  ASSERT_EQ(c.checks.size(), 4u);
  EXPECT_EQ(c.checks[0].name, kCheckChain);
  EXPECT_EQ(c.checks[1].name, kCheckReferences);
  EXPECT_EQ(c.checks[2].name, kCheckLemma);
  EXPECT_EQ(c.checks[3].name, kCheckOrdering);
  EXPECT_TRUE(c.lemma);
  EXPECT_EQ(a.audit.verdict.decision, Decision::kViolation);
  EXPECT_EQ(a.audit.verdict.exit_code(), 10);
}

TEST(VerifyEvidence, HonestAuditIsNotProven) {
  auto a = audited(PlatformMode::kHonest);
  ASSERT_EQ(a.audit.checks.size(), 1u);
  EXPECT_TRUE(a.audit.checks[0].all_passed());
  EXPECT_FALSE(a.audit.checks[0].lemma);
  EXPECT_EQ(a.audit.verdict.decision, Decision::kNotProven);
  EXPECT_EQ(a.audit.verdict.exit_code(), 0);
}

TEST(VerifyEvidence, MissingStopRequestFailsReferences) {
  auto a = audited(PlatformMode::kViolating);
  Evidence e = a.evidence();
  // Point the stop reference at the victim's ordinary purchase instead.
  const auto& entries = a.audit.ledger.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].buyer == "v" && entries[i].kind == EntryKind::kPurchase) {
      e.ledger_refs[0] = i;
      break;
    }
  }
  auto c = evidence_with(a, e);
  EXPECT_EQ(c.failed_check(), kCheckReferences);
  EXPECT_EQ(adjudicate({c}, 2).decision, Decision::kNotProven);
  EXPECT_EQ(adjudicate({c}, 2).exit_code(), 2);
}

TEST(VerifyEvidence, StopAfterPurchaseFailsReferences) {
  auto a = audited(PlatformMode::kViolating);
  Ledger ledger = a.audit.ledger;
  const auto pos = ledger.append_one({"v", "", 0.0, ledger.entries().back().transaction_time + 1,
                                      EntryKind::kStopRequest, ""});
  Evidence e = a.evidence();
  e.ledger_refs[0] = pos;
  auto c = verify_evidence(e, {ledger.chain(), ledger.entries(), ledger.head()}, 2);
  EXPECT_EQ(c.failed_check(), kCheckReferences);
}

TEST(VerifyEvidence, AlteredLemmaClaimFailsLemma) {
  auto a = audited(PlatformMode::kHonest);
  Evidence e = a.evidence();
  e.lemma_triggered = true;
  EXPECT_EQ(evidence_with(a, e).failed_check(), kCheckLemma);
}

TEST(VerifyEvidence, AlteredSnapshotOrDisclosureFailsLemma) {
  auto a = audited(PlatformMode::kViolating);
  Evidence e = a.evidence();
  e.a.insert("extra");
  EXPECT_EQ(evidence_with(a, e).failed_check(), kCheckLemma);
  e = a.evidence();
  e.b.push_back("extra");
  EXPECT_EQ(evidence_with(a, e).failed_check(), kCheckLemma);
  e = a.evidence();
  e.s = 3;
  EXPECT_EQ(evidence_with(a, e).failed_check(), kCheckLemma);
}

TEST(VerifyEvidence, AlteredCleartextRatingFailsReferences) {
  auto a = audited(PlatformMode::kViolating);
  auto entries = a.audit.ledger.entries();
  entries[a.evidence().ledger_refs[2]].rate = 0.8;
  auto c = verify_evidence(a.evidence(), {a.audit.ledger.chain(), entries, a.audit.ledger.head()}, 2);
  EXPECT_EQ(c.failed_check(), kCheckReferences);
}

TEST(VerifyEvidence, ChainTamperAndHeadMismatch) {
  auto a = audited(PlatformMode::kViolating);
  auto chain = a.audit.ledger.chain();
  chain[0].commitments[0][0] ^= 1;
  auto c = verify_evidence(a.evidence(), {chain, a.audit.ledger.entries(), std::nullopt}, 2);
  EXPECT_EQ(c.failed_check(), kCheckChain);
  chain = a.audit.ledger.chain();
  chain.pop_back();
  c = verify_evidence(a.evidence(), {chain, a.audit.ledger.entries(), a.audit.ledger.head()}, 2);
  EXPECT_EQ(c.failed_check(), kCheckChain);
}

TEST(VerifyEvidence, TooFewReferencesFailReferences) {
  auto a = audited(PlatformMode::kViolating);
  Evidence e = a.evidence();
  e.ledger_refs.pop_back();
  EXPECT_EQ(evidence_with(a, e).failed_check(), kCheckReferences);
}

TEST(VerifyEvidence, RequiresClusterSize) {
  auto a = audited(PlatformMode::kViolating);
  EXPECT_THROW(verify_evidence(a.evidence(), a.view(), 0), Error);
}

EvidenceCheck synthetic_check(bool passed, bool lemma, bool overlap) {
  EvidenceCheck c;
  for (const char* n : {kCheckChain, kCheckReferences, kCheckLemma, kCheckOrdering}) {
    c.checks.push_back({n, true, ""});
  }
  if (!passed) c.checks[1].passed = false;
  c.lemma = lemma;
  c.overlap = overlap;
  return c;
}

TEST(Adjudicate, Examples) {
  auto empty = adjudicate({}, 10);
  EXPECT_EQ(empty.decision, Decision::kNotProven);
  EXPECT_EQ(empty.exit_code(), 0);

  auto overlap_only = adjudicate({synthetic_check(true, false, true)}, 10);
  EXPECT_EQ(overlap_only.decision, Decision::kNotProven);
  EXPECT_TRUE(overlap_only.corroborated);
  EXPECT_EQ(overlap_only.exit_code(), 0);

  auto proven = adjudicate({synthetic_check(true, false, false), synthetic_check(true, true, false)}, 10);
  EXPECT_EQ(proven.decision, Decision::kViolation);
  EXPECT_EQ(proven.exit_code(), 10);

  // A lemma on an evidence that failed verification is ignored.
  auto failed = adjudicate({synthetic_check(false, true, false)}, 10);
  EXPECT_EQ(failed.decision, Decision::kNotProven);
  EXPECT_EQ(failed.exit_code(), 2);

  auto j = verdict_to_json(proven);
  EXPECT_EQ(j["decision"], "violation");
  EXPECT_EQ(j["metadata_S"], 10);
  EXPECT_EQ(j["basis"].size(), 2u);
}

TEST(ReExecute, MatchesDetector) {
  auto a = audited(PlatformMode::kViolating);
  ASSERT_TRUE(a.audit.re_execution.has_value());
  const auto& r = *a.audit.re_execution;
  EXPECT_EQ(r.targets, std::vector<ItemId>{"t"});
  ASSERT_EQ(r.evidences.size(), 1u);
  EXPECT_TRUE(r.evidences[0].is_target);
  EXPECT_EQ(r.evidences[0].failed_criterion, "");
  EXPECT_TRUE(r.evidences[0].lemma);
  // Twice from the same inputs gives the same result.
  EXPECT_EQ(re_execute_detector(a.audit.outcome.community_export, a.view(),
                                *a.audit.outcome.community_ref, "v",
                                a.audit.outcome.evidences, 2, kWindow),
            r);
}

std::string edit_export(const std::string& exported, const std::function<void(json&)>& edit) {
  json j = json::parse(exported);
  edit(j);
  return j.dump();
}

TEST(ReExecute, AlteredHistoryRatingIsIntegrityError) {
  auto a = audited(PlatformMode::kViolating);
  const std::string tampered = edit_export(a.audit.outcome.community_export, [](json& j) {
    j["histories"]["v"][0][1] = 0.4;
  });
  EXPECT_THROW(re_execute_detector(tampered, a.view(), *a.audit.outcome.community_ref, "v",
                                   a.audit.outcome.evidences, 2, kWindow),
               IntegrityError);
}

TEST(ReExecute, PostHocClusterEditIsIntegrityError) {
  auto a = audited(PlatformMode::kViolating);
  const std::string tampered = edit_export(a.audit.outcome.community_export, [](json& j) {
    for (auto& c : j["clusters"]) {
      if (c["item"] == "t") c["members"].push_back({{"item", "zz"}, {"tag", "update"}});
    }
  });
  EXPECT_THROW(re_execute_detector(tampered, a.view(), *a.audit.outcome.community_ref, "v",
                                   a.audit.outcome.evidences, 2, kWindow),
               IntegrityError);
}

TEST(ReExecute, WrongReferenceIsIntegrityError) {
  auto a = audited(PlatformMode::kViolating);
  EXPECT_THROW(re_execute_detector(a.audit.outcome.community_export, a.view(), 0, "v",
                                   a.audit.outcome.evidences, 2, kWindow),
               IntegrityError);
  EXPECT_THROW(re_execute_detector(a.audit.outcome.community_export, a.view(),
                                   *a.audit.outcome.community_ref, "v",
                                   a.audit.outcome.evidences, 0, kWindow),
               Error);
}

TEST(ReExecute, FlagsProbeThatFailsC3) {
  // b's cluster picks up z by growing, so b is not a valid target.
  Community c(std::set<UserId>{"m1", "m2", "v"});
  c.on_member_purchase("m1", "b", 1.0, 0, {"a"});
  c.on_member_purchase("m2", "a", 1.0, 1, {"z"});
  c.on_member_purchase("v", "h", 1.0, 2, {});
  c.on_stop_request("v", 3);
  Ledger ledger;
  ledger.append_one({"v", "", 0.0, 3, EntryKind::kStopRequest, ""});
  const std::string exported = canonical_community_export(c);
  const auto ref = commit_community_state(exported, ledger, "v", 4);
  const auto snap = ledger.append_one(
      {"v", "b", 0.0, 4, EntryKind::kClusterSnapshot, encode_item_list({"a", "z"})});
  const auto pos = ledger.append({{"v", "b", 1.0, 4, EntryKind::kPurchase, ""},
                                  {"v", "b", 0.0, 4, EntryKind::kDisclosure, encode_item_list({"q"})}});
  Evidence e;
  e.victim = "v";
  e.probe = "b";
  e.ledger_refs = {0, snap, pos[0], pos[1]};
  auto r = re_execute_detector(exported, {ledger.chain(), ledger.entries(), ledger.head()}, ref,
                               "v", {e}, 2);
  ASSERT_EQ(r.evidences.size(), 1u);
  EXPECT_FALSE(r.evidences[0].is_target);
  EXPECT_EQ(r.evidences[0].failed_criterion, "C3");
  EXPECT_TRUE(r.evidences[0].lemma);  // {a, z} u {q} has 3 > 2 items
  EXPECT_EQ(re_execution_to_json(r)["evidences"][0]["failed_criterion"], "C3");
}

TEST(Decision, Names) {
  EXPECT_EQ(to_string(Decision::kViolation), "violation");
  EXPECT_EQ(to_string(Decision::kNotProven), "not_proven");
}

}  // namespace
}  // namespace stopaudit
