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

#include "stopaudit/serialize.h"

namespace stopaudit {
namespace {

// Commitment position -> (block, slot), or nullopt past the chain.
std::optional<Commitment> commitment_for(const std::vector<LedgerBlock>& chain,
                                         std::size_t position) {
  for (const auto& b : chain) {
    if (position < b.commitments.size()) return b.commitments[position];
    position -= b.commitments.size();
  }
  return std::nullopt;
}

// Resolves `position` to a cleartext entry that matches its commitment.
const TransactionEntry* resolve(const JudgeLedger& ledger, std::size_t position,
                                std::string& why) {
  if (position >= ledger.entries.size()) {
    why = "position " + std::to_string(position) + " not in entry store";
    return nullptr;
  }
  auto c = commitment_for(ledger.chain, position);
  if (!c) {
    why = "position " + std::to_string(position) + " has no commitment";
    return nullptr;
  }
  if (!verify_disclosure(ledger.entries[position], *c)) {
    why = "entry " + std::to_string(position) + " does not match its commitment";
    return nullptr;
  }
  return &ledger.entries[position];
}

CheckResult pass(const char* name) { return {name, true, ""}; }
CheckResult fail(const char* name, std::string why) { return {name, false, std::move(why)}; }

}  // namespace

bool EvidenceCheck::all_passed() const {
  if (checks.size() != 4) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::string EvidenceCheck::failed_check() const {
  for (const auto& c : checks) {
    if (!c.passed) return c.name;
  }
  return "";
}

EvidenceCheck verify_evidence(const Evidence& evidence, const JudgeLedger& ledger,
                              std::size_t metadata_s, std::size_t evidence_id) {
  if (metadata_s == 0) throw Error("cluster size metadata S is required");
  EvidenceCheck out;
  out.evidence_id = evidence_id;
  out.overlap = !evidence.overlap.empty();
  auto& checks = out.checks;

  // 1. chain
  const ChainCheck chain = verify_chain(ledger.chain);
  if (!chain.valid) {
    checks.push_back(fail(kCheckChain, "block " + std::to_string(*chain.first_bad_index) +
                                           " fails verification"));
    return out;
  }
  if (ledger.head && *ledger.head != head_digest(ledger.chain)) {
    checks.push_back(fail(kCheckChain, "head digest mismatch"));
    return out;
  }
  checks.push_back(pass(kCheckChain));

  // 2. references
  if (evidence.ledger_refs.size() != 4) {
    checks.push_back(fail(kCheckReferences, "expected 4 ledger references"));
    return out;
  }
  const TransactionEntry* ref[4];
  std::string why;
  for (int i = 0; i < 4; ++i) {
    ref[i] = resolve(ledger, evidence.ledger_refs[i], why);
    if (!ref[i]) {
      checks.push_back(fail(kCheckReferences, why));
      return out;
    }
  }
  const auto& [stop, snapshot, purchase, disclosure] = ref;
  const EntryKind expected[4] = {EntryKind::kStopRequest, EntryKind::kClusterSnapshot,
                                 EntryKind::kPurchase, EntryKind::kDisclosure};
  for (int i = 0; i < 4; ++i) {
    if (ref[i]->kind != expected[i]) {
      checks.push_back(fail(kCheckReferences, "reference " + std::to_string(i) + " is a " +
                                                  to_string(ref[i]->kind) + ", expected " +
                                                  to_string(expected[i])));
      return out;
    }
    if (ref[i]->buyer != evidence.victim) {
      checks.push_back(fail(kCheckReferences,
                            "reference " + std::to_string(i) + " belongs to another user"));
      return out;
    }
  }
  if (snapshot->item_id != evidence.probe || purchase->item_id != evidence.probe ||
      disclosure->item_id != evidence.probe) {
    checks.push_back(fail(kCheckReferences, "references name a different probe item"));
    return out;
  }
  if (purchase->rate != kProbeRating) {
    checks.push_back(fail(kCheckReferences, "probe purchase rating is not 1.0"));
    return out;
  }
  if (disclosure->transaction_time != purchase->transaction_time) {
    checks.push_back(fail(kCheckReferences, "disclosure does not answer the probe purchase"));
    return out;
  }
  if (!(stop->transaction_time < purchase->transaction_time &&
        evidence.ledger_refs[0] < evidence.ledger_refs[2])) {
    checks.push_back(fail(kCheckReferences, "stop request does not predate the purchase"));
    return out;
  }
  checks.push_back(pass(kCheckReferences));

  // 3. lemma
  auto a_list = decode_item_list(snapshot->payload);
  auto b_list = decode_item_list(disclosure->payload);
  if (!a_list || !b_list) {
    checks.push_back(fail(kCheckLemma, "committed payload is malformed"));
    return out;
  }
  if (item_set(*a_list) != evidence.a) {
    checks.push_back(fail(kCheckLemma, "cluster snapshot differs from the committed one"));
    return out;
  }
  if (*b_list != evidence.b) {
    checks.push_back(fail(kCheckLemma, "disclosed items differ from the committed ones"));
    return out;
  }
  if (evidence.s != metadata_s) {
    checks.push_back(fail(kCheckLemma, "evidence S differs from platform metadata"));
    return out;
  }
  const ItemSet b = item_set(*b_list);
  if (b.size() > metadata_s) {
    checks.push_back(fail(kCheckLemma, "disclosure larger than the cluster size"));
    return out;
  }
  out.lemma = lemma_check(item_set(*a_list), b, metadata_s);
  if (out.lemma != evidence.lemma_triggered) {
    checks.push_back(fail(kCheckLemma, "recomputed lemma disagrees with the claim"));
    return out;
  }
  checks.push_back(pass(kCheckLemma));

  // 4. ordering
  if (!(evidence.ledger_refs[1] < evidence.ledger_refs[2] &&
        snapshot->transaction_time <= purchase->transaction_time)) {
    checks.push_back(fail(kCheckOrdering, "snapshot not committed before the purchase"));
    return out;
  }
  checks.push_back(pass(kCheckOrdering));
  return out;
}

std::string to_string(Decision d) {
  return d == Decision::kViolation ? "violation" : "not_proven";
}

int Verdict::exit_code() const {
  if (decision == Decision::kViolation) return 10;
  for (const auto& r : basis) {
    if (!r.all_passed()) return 2;
  }
  return 0;
}

Verdict adjudicate(const std::vector<EvidenceCheck>& results, std::size_t metadata_s) {
  Verdict v;
  v.basis = results;
  v.metadata_s = metadata_s;
  for (const auto& r : results) {
    if (!r.all_passed()) continue;
    if (r.lemma) v.decision = Decision::kViolation;
    if (!r.lemma && r.overlap) v.corroborated = true;
  }
  return v;
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& r : v.basis) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) {
      checks.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    basis.push_back({{"evidence", r.evidence_id},
                     {"checks", checks},
                     {"failed_check", r.failed_check()},
                     {"lemma", r.lemma},
                     {"overlap", r.overlap}});
  }
  return {{"decision", to_string(v.decision)},
          {"basis", basis},
          {"metadata_S", v.metadata_s},
          {"corroborated", v.corroborated}};
}

ReExecution re_execute_detector(const std::string& community_export,
                                const JudgeLedger& ledger, std::size_t community_ref,
                                const UserId& victim,
                                const std::vector<Evidence>& evidences,
                                std::size_t metadata_s,
                                const SelectionOptions& options) {
  if (metadata_s == 0) throw Error("cluster size metadata S is required");
  if (!verify_chain(ledger.chain).valid) throw IntegrityError("ledger chain is invalid");
  std::string why;
  const TransactionEntry* state = resolve(ledger, community_ref, why);
  if (!state) throw IntegrityError(why);
  if (state->kind != EntryKind::kCommunityState || state->buyer != victim) {
    throw IntegrityError("reference is not the victim's community-state entry");
  }
  const Digest d = community_digest(community_export);
  if (state->payload != std::string(d.begin(), d.end())) {
    throw IntegrityError("community export does not match its commitment");
  }

  const Community community = community_from_json(json::parse(community_export));
  ReExecution out;
  const auto targets = select_target_items(community, victim, options);
  for (const auto& t : targets) out.targets.push_back(t.item);

  for (const auto& e : evidences) {
    ReExecutedEvidence r;
    r.probe = e.probe;
    const CriteriaCheck cc = evaluate_criteria(community, victim, e.probe, options);
    r.is_target = cc.passes();
    r.failed_criterion = cc.first_failure();

    if (e.ledger_refs.size() != 4) throw IntegrityError("evidence lacks ledger references");
    const TransactionEntry* snap = resolve(ledger, e.ledger_refs[1], why);
    if (!snap) throw IntegrityError(why);
    const TransactionEntry* disc = resolve(ledger, e.ledger_refs[3], why);
    if (!disc) throw IntegrityError(why);
    auto a = decode_item_list(snap->payload);
    auto b = decode_item_list(disc->payload);
    if (!a || !b) throw IntegrityError("committed payload is malformed");
    r.lemma = lemma_check(item_set(*a), item_set(*b), metadata_s);
    out.evidences.push_back(std::move(r));
  }
  return out;
}

nlohmann::json re_execution_to_json(const ReExecution& r) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : r.evidences) {
    ev.push_back({{"probe", e.probe},
                  {"is_target", e.is_target},
                  {"failed_criterion", e.failed_criterion},
                  {"lemma", e.lemma}});
  }
  return {{"targets", r.targets}, {"evidences", ev}};
}

}  // namespace stopaudit
