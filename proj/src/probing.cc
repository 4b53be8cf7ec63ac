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
#include <iterator>

#include "stopaudit/serialize.h"

namespace stopaudit {
namespace {

std::optional<UserId> owner_of(const Community& community, const ItemId& item,
                               const std::optional<UserId>& victim) {
  for (const auto& [user, first] : community.first_purchases()) {
    if (first == item && (!victim || user != *victim)) return user;
  }
  return std::nullopt;
}

bool disjoint(const ItemSet& a, const ItemSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return false;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

std::optional<std::size_t> latest_stop_position(const Ledger& ledger,
                                                const UserId& victim) {
  const auto& entries = ledger.entries();
  for (std::size_t i = entries.size(); i-- > 0;) {
    if (entries[i].kind == EntryKind::kStopRequest && entries[i].buyer == victim) return i;
  }
  return std::nullopt;
}

}  // namespace

SelectionOptions SelectionOptions::lemma_window(std::size_t cluster_size,
                                                std::size_t disclose_k) {
  if (disclose_k > cluster_size) throw Error("k must not exceed S");
  SelectionOptions o;
  o.min_cluster = cluster_size - disclose_k + 1;
  o.max_cluster = cluster_size;
  return o;
}

std::string CriteriaCheck::first_failure() const {
  if (!c1) return "C1";
  if (!c4) return "C4";
  if (!c3) return "C3";
  if (!c2) return "C2";
  if (!size_ok) return "size";
  return "";
}

CriteriaCheck evaluate_criteria(const Community& community,
                                const std::optional<UserId>& victim,
                                const ItemId& item,
                                const SelectionOptions& options) {
  CriteriaCheck check;
  check.c1 = owner_of(community, item, victim).has_value();
  if (!community.has_cluster(item)) return check;
  const ClusterSnapshot snap = community.cluster_snapshot(item);

  check.c4 = true;
  if (victim) {
    const SimilarityMap& sim = community.similarity_view();
    for (const auto& h : community.pre_request_history(*victim)) {
      if (h.item == item || sim.similarity(item, h.item) != 0.0) {
        check.c4 = false;
        break;
      }
    }
    if (check.c4) {
      ItemSet probe_side = snap.members;
      probe_side.insert(item);
      check.c4 = disjoint(probe_side, community.history_cluster(*victim));
    }
  }

  auto grown = snap.by_tag.find(Provenance::kGrown);
  check.c3 = grown == snap.by_tag.end() || grown->second.empty();

  // C2 compares against the map-based cluster {y : sim(item, y) > 0}, not
  // the per-item cluster, which absorbs every disclosure by construction.
  check.c2 = true;
  const SimilarityMap& sim = community.similarity_view();
  for (const Observation* o : community.observations_for_item(item)) {
    for (const auto& d : o->disclosed) {
      if (sim.similarity(item, d) == 0.0) {
        check.c2 = false;
        break;
      }
    }
    if (!check.c2) break;
  }

  const std::size_t n = snap.members.size();
  check.size_ok = (!options.min_cluster || n >= *options.min_cluster) &&
                  (!options.max_cluster || n <= *options.max_cluster);
  return check;
}

std::vector<TargetItem> select_target_items(const Community& community,
                                            const std::optional<UserId>& victim,
                                            const SelectionOptions& options) {
  ItemSet candidates;
  for (const auto& [user, first] : community.first_purchases()) {
    if (!victim || user != *victim) candidates.insert(first);
  }
  std::vector<TargetItem> out;
  for (const auto& item : candidates) {
    if (!evaluate_criteria(community, victim, item, options).passes()) continue;
    out.push_back({item, *owner_of(community, item, victim),
                   community.cluster_snapshot(item)});
  }
  return out;
}

bool lemma_check(const ItemSet& a, const ItemSet& b, std::size_t cluster_size) {
  if (b.size() > cluster_size) {
    throw Error("disclosure larger than the cluster size");
  }
  std::size_t a_minus_b = 0;
  for (const auto& x : a) {
    if (!b.count(x)) ++a_minus_b;
  }
  return a_minus_b > cluster_size - b.size();
}

ItemSet overlap_check(const ItemSet& disclosed, const ItemSet& victim_history) {
  ItemSet out;
  std::set_intersection(disclosed.begin(), disclosed.end(), victim_history.begin(),
                        victim_history.end(), std::inserter(out, out.end()));
  return out;
}

ItemSet item_set(const std::vector<ItemId>& items) {
  return ItemSet(items.begin(), items.end());
}

std::optional<std::size_t> issue_stop_request(Platform& platform,
                                              Community& community,
                                              Ledger* ledger,
                                              const UserId& victim) {
  const Seq seq = platform.stop_request(victim);
  community.on_stop_request(victim, seq);
  if (!ledger) return std::nullopt;
  return ledger->append_one({victim, "", 0.0, seq, EntryKind::kStopRequest, ""});
}

std::size_t commit_community_state(const Community& community, Ledger& ledger,
                                   const UserId& victim, Seq at) {
  return commit_community_state(canonical_community_export(community), ledger, victim, at);
}

std::size_t commit_community_state(const std::string& canonical_export,
                                   Ledger& ledger, const UserId& victim, Seq at) {
  const Digest d = community_digest(canonical_export);
  return ledger.append_one({victim, "", 0.0, at, EntryKind::kCommunityState,
                            std::string(d.begin(), d.end())});
}

Evidence run_probe(Platform& platform, const Community& community,
                   const UserId& victim, const ItemId& target, int round) {
  Evidence e;
  e.victim = victim;
  e.probe = target;
  e.round = round;
  e.a = community.cluster_snapshot(target).members;
  e.s = platform.config().cluster_size;

  const Disclosure d = platform.record_purchase(victim, target, kProbeRating);
  e.b = d.items;
  const ItemSet b = item_set(e.b);
  e.undisclosed = e.s - b.size();
  e.lemma_triggered = lemma_check(e.a, b, e.s);

  ItemSet history;
  for (const auto& h : community.pre_request_history(victim)) history.insert(h.item);
  e.overlap = overlap_check(b, history);
  return e;
}

Evidence probe_round(Platform& platform, Community& community, Ledger* ledger,
                     const UserId& victim, const ItemId& target, int round) {
  std::optional<std::size_t> snapshot_pos;
  if (ledger) {
    const ItemSet a = community.cluster_snapshot(target).members;
    snapshot_pos = ledger->append_one(
        {victim, target, 0.0, platform.clock(), EntryKind::kClusterSnapshot,
         encode_item_list(std::vector<ItemId>(a.begin(), a.end()))});
  }

  const Seq seq = platform.clock();
  Evidence e = run_probe(platform, community, victim, target, round);
  community.record_probe(victim, target, seq, e.b);

  if (ledger) {
    auto pos = ledger->append(
        {{victim, target, kProbeRating, seq, EntryKind::kPurchase, ""},
         {victim, target, 0.0, seq, EntryKind::kDisclosure, encode_item_list(e.b)}});
    auto stop = latest_stop_position(*ledger, victim);
    if (!stop) throw Error("probe without a committed stop request");
    e.ledger_refs = {*stop, *snapshot_pos, pos[0], pos[1]};
  }
  return e;
}

std::string to_string(ProbeStatus status) {
  switch (status) {
    case ProbeStatus::kViolationProven:
      return "violation_proven";
    case ProbeStatus::kInconclusive:
      return "inconclusive";
    case ProbeStatus::kExhausted:
      return "exhausted";
  }
  return "?";
}

ProbeOutcome probe_until_success(Platform& platform, Community& community,
                                 Ledger* ledger, const UserId& victim,
                                 int max_rounds, Rng& rng,
                                 const SelectionOptions& options) {
  if (max_rounds < 1) throw Error("max_rounds must be positive");
  if (!community.is_member(victim)) throw Error("victim " + victim + " is not a member");
  if (!community.stop_seq(victim)) issue_stop_request(platform, community, ledger, victim);

  ProbeOutcome out;
  out.targets = select_target_items(community, victim, options);
  if (ledger) {
    out.community_export = canonical_community_export(community);
    out.community_ref =
        commit_community_state(out.community_export, *ledger, victim, platform.clock());
  }

  std::vector<ItemId> remaining;
  for (const auto& t : out.targets) remaining.push_back(t.item);

  for (int round = 1; round <= max_rounds; ++round) {
    if (remaining.empty()) {
      out.status = ProbeStatus::kExhausted;
      return out;
    }
    if (round > 1) issue_stop_request(platform, community, ledger, victim);
    const std::size_t pick = rng.uniform_below(remaining.size());
    const ItemId target = remaining[pick];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));

    out.evidences.push_back(probe_round(platform, community, ledger, victim, target, round));
    out.rounds_used = round;
    if (out.evidences.back().lemma_triggered) {
      out.status = ProbeStatus::kViolationProven;
      return out;
    }
  }
  out.status = remaining.empty() ? ProbeStatus::kExhausted : ProbeStatus::kInconclusive;
  return out;
}

SuccessRate one_round_success_rate(const Platform& platform,
                                   const Community& community,
                                   const UserId& victim,
                                   const SelectionOptions& options) {
  Platform base = platform;
  Community comm = community;
  if (!comm.stop_seq(victim)) issue_stop_request(base, comm, nullptr, victim);

  const auto targets = select_target_items(comm, victim, options);
  if (targets.empty()) throw Error("no target items for victim " + victim);

  SuccessRate rate;
  rate.targets = targets.size();
  for (const auto& t : targets) {
    Platform fork = base;
    if (run_probe(fork, comm, victim, t.item, 1).lemma_triggered) ++rate.triggered;
  }
  return rate;
}

}  // namespace stopaudit
