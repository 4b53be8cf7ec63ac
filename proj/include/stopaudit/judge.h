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

#ifndef STOPAUDIT_JUDGE_H_
#define STOPAUDIT_JUDGE_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stopaudit/ledger.h"
#include "stopaudit/probing.h"

namespace stopaudit {

// Names of the checks, in the order they run.
inline constexpr const char* kCheckChain = "chain";
inline constexpr const char* kCheckReferences = "references";
inline constexpr const char* kCheckLemma = "lemma";
inline constexpr const char* kCheckOrdering = "ordering";

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;

  bool operator==(const CheckResult&) const = default;
};

// Outcome of verifying one evidence. Checks stop at the first failure.
struct EvidenceCheck {
  std::size_t evidence_id = 0;
  std::vector<CheckResult> checks;
  bool lemma = false;       // recomputed, meaningful once the lemma check ran
  bool overlap = false;     // evidence reports a non-empty overlap

  bool all_passed() const;
  // Name of the failed check, or "" when every check passed.
  std::string failed_check() const;
};

// Ledger as handed to the judge, with the separately published head.
struct JudgeLedger {
  std::vector<LedgerBlock> chain;
  std::vector<TransactionEntry> entries;
  std::optional<Digest> head;  // expected head digest; unset skips the comparison
};

// Runs, in order: chain integrity and head digest; ledger references and
// their commitments, including a stop request predating the purchase; the
// lemma recomputed from the committed snapshot and disclosure with S; and
// the snapshot committed before the purchase. Throws Error if S is 0.
EvidenceCheck verify_evidence(const Evidence& evidence, const JudgeLedger& ledger,
                              std::size_t metadata_s, std::size_t evidence_id = 0);

enum class Decision { kViolation, kNotProven };

std::string to_string(Decision d);

struct Verdict {
  Decision decision = Decision::kNotProven;
  std::vector<EvidenceCheck> basis;
  std::size_t metadata_s = 0;
  bool corroborated = false;  // some verified evidence shows overlap only

  // 10 on violation, 2 when any evidence failed a check, else 0.
  int exit_code() const;
};

Verdict adjudicate(const std::vector<EvidenceCheck>& results, std::size_t metadata_s);

nlohmann::json verdict_to_json(const Verdict& v);

struct ReExecutedEvidence {
  ItemId probe;
  bool is_target = false;
  std::string failed_criterion;  // "" for targets
  bool lemma = false;

  bool operator==(const ReExecutedEvidence&) const = default;
};

struct ReExecution {
  std::vector<ItemId> targets;
  std::vector<ReExecutedEvidence> evidences;

  bool operator==(const ReExecution&) const = default;
};

// Imports the committed community export, checks it against the
// community-state entry at `community_ref`, reruns target selection for the
// victim and the lemma for each evidence using its committed disclosure.
// Throws IntegrityError when the export does not match its commitment.
ReExecution re_execute_detector(const std::string& community_export,
                                const JudgeLedger& ledger, std::size_t community_ref,
                                const UserId& victim,
                                const std::vector<Evidence>& evidences,
                                std::size_t metadata_s,
                                const SelectionOptions& options = {});

nlohmann::json re_execution_to_json(const ReExecution& r);

}  // namespace stopaudit

#endif  // STOPAUDIT_JUDGE_H_
