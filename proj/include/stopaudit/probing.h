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

#ifndef STOPAUDIT_PROBING_H_
#define STOPAUDIT_PROBING_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stopaudit/community.h"
#include "stopaudit/ledger.h"
#include "stopaudit/platform.h"
#include "stopaudit/rng.h"

namespace stopaudit {

// Rating a victim gives every probing item.
inline constexpr double kProbeRating = 1.0;

// Extra bounds on the probe's cluster size |A|. Unset bounds do not filter.
struct SelectionOptions {
  std::optional<std::size_t> min_cluster;
  std::optional<std::size_t> max_cluster;

  // The window in which the lemma can both fire and stay sound for a
  // platform with cluster size S disclosing k items: S - k < |A| <= S.
  static SelectionOptions lemma_window(std::size_t cluster_size,
                                       std::size_t disclose_k);
};

// Per-criterion outcome for one candidate item.
//   c1: first purchase of some member other than the victim
//   c4: zero similarity to every pre-request history item of the victim,
//       and {item} plus its cluster disjoint from the victim's history
//       cluster
//   c3: cluster has no member that entered through a growing operation
//   c2: every recommendation observed for the item was already inside its
//       cluster when observed
struct CriteriaCheck {
  bool c1 = false;
  bool c4 = false;
  bool c3 = false;
  bool c2 = false;
  bool size_ok = false;

  bool passes() const { return c1 && c4 && c3 && c2 && size_ok; }
  // Name of the first failing filter in evaluation order, or "".
  std::string first_failure() const;
};

CriteriaCheck evaluate_criteria(const Community& community,
                                const std::optional<UserId>& victim,
                                const ItemId& item,
                                const SelectionOptions& options = {});

struct TargetItem {
  ItemId item;
  UserId owner;  // member whose first purchase it was
  ClusterSnapshot cluster;
};

// Items passing C1, then C4, C3 and C2, sorted by id. Without a victim, C1
// accepts any member's first purchase and C4 is vacuous.
std::vector<TargetItem> select_target_items(const Community& community,
                                            const std::optional<UserId>& victim,
                                            const SelectionOptions& options = {});

// |A \ B| > S - |B|, equivalently |A u B| > S. Throws if |B| > S.
bool lemma_check(const ItemSet& a, const ItemSet& b, std::size_t cluster_size);

ItemSet overlap_check(const ItemSet& disclosed, const ItemSet& victim_history);

// One probing round's record.
struct Evidence {
  UserId victim;
  ItemId probe;
  ItemSet a;                  // probe's cluster snapshot before the purchase
  std::vector<ItemId> b;      // disclosed items, platform order
  std::size_t s = 0;          // platform cluster size
  std::size_t undisclosed = 0;
  bool lemma_triggered = false;
  ItemSet overlap;            // B intersected with pre-request history
  std::vector<std::size_t> ledger_refs;
  int round = 0;

  bool operator==(const Evidence&) const = default;
};

ItemSet item_set(const std::vector<ItemId>& items);

// Commits a stop request on the platform, the community and (if given) the
// ledger. Returns the ledger position, or nullopt without a ledger.
std::optional<std::size_t> issue_stop_request(Platform& platform,
                                              Community& community,
                                              Ledger* ledger,
                                              const UserId& victim);

// Commits the community export the detector selected targets from.
std::size_t commit_community_state(const Community& community, Ledger& ledger,
                                   const UserId& victim, Seq at);
// Same, for an export already produced by canonical_community_export.
std::size_t commit_community_state(const std::string& canonical_export,
                                   Ledger& ledger, const UserId& victim, Seq at);

// Buys `target` as the victim with rating 1.0 and assembles the evidence.
// Mutates only the platform.
Evidence run_probe(Platform& platform, const Community& community,
                   const UserId& victim, const ItemId& target, int round);

// run_probe plus the community's probe log and, when a ledger is given,
// commitments for the snapshot (before the purchase), the purchase and
// the disclosure.
Evidence probe_round(Platform& platform, Community& community, Ledger* ledger,
                     const UserId& victim, const ItemId& target, int round);

enum class ProbeStatus { kViolationProven, kInconclusive, kExhausted };

std::string to_string(ProbeStatus status);

struct ProbeOutcome {
  ProbeStatus status = ProbeStatus::kExhausted;
  int rounds_used = 0;
  std::vector<Evidence> evidences;
  std::vector<TargetItem> targets;
  std::optional<std::size_t> community_ref;
  std::string community_export;  // the committed bytes, when a ledger is used
};

// Draws targets uniformly without replacement and probes until the lemma
// fires, max_rounds is reached, or targets run out. Before every round
// after the first the victim renews the stop request, so the previous
// probe purchase is covered by it.
ProbeOutcome probe_until_success(Platform& platform, Community& community,
                                 Ledger* ledger, const UserId& victim,
                                 int max_rounds, Rng& rng,
                                 const SelectionOptions& options = {});

struct SuccessRate {
  std::size_t triggered = 0;  // M
  std::size_t targets = 0;    // N
  double rate() const {
    return targets == 0 ? 0.0 : static_cast<double>(triggered) / targets;
  }
};

// Probes every target once on its own fork. The inputs are not modified;
// the victim's stop request is issued on the fork if it has none.
SuccessRate one_round_success_rate(const Platform& platform,
                                   const Community& community,
                                   const UserId& victim,
                                   const SelectionOptions& options = {});

}  // namespace stopaudit

#endif  // STOPAUDIT_PROBING_H_
