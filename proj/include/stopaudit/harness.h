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

#ifndef STOPAUDIT_HARNESS_H_
#define STOPAUDIT_HARNESS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "stopaudit/community.h"
#include "stopaudit/ingest.h"
#include "stopaudit/judge.h"
#include "stopaudit/ledger.h"
#include "stopaudit/platform.h"
#include "stopaudit/probing.h"

namespace stopaudit {

struct BackendConfig {
  std::string name = "plaintext";  // "plaintext" or "shared"
  std::size_t n_parties = 3;
  std::uint64_t seed = 0;
};

enum class VictimPolicy { kAllGroupOne, kSingle };

struct ExperimentConfig {
  // Dataset file; synthetic records from `synth` when unset.
  std::optional<std::string> dataset_path;
  RecordFormat dataset_format = RecordFormat::kJsonl;
  double rating_scale = 5.0;  // raw maximum rating of the dataset file
  SynthParams synth;

  std::vector<double> fractions{0.02, 0.05, 0.10, 0.20};
  std::uint64_t community_seed = 0;
  PlatformConfig platform;
  BackendConfig backend;

  VictimPolicy victim_policy = VictimPolicy::kAllGroupOne;
  std::optional<UserId> victim;  // kSingle only
  int max_rounds = 10;
  // Share of the timeline before the community starts observing; members'
  // records from that prefix seed the initial map and clusters.
  double init_fraction = 0.0;
  // Restrict targets to clusters with S - k < |A| <= S.
  bool lemma_window = true;
  // Narrow the window further to |A| = S. Smaller clusters rarely lose an
  // item to a tie at the top score, so they seldom trigger.
  bool full_clusters_only = false;
  std::string out_dir = "out";

  void validate() const;
  SelectionOptions selection() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

// Normalized, de-duplicated records in seq order.
std::vector<RatingRecord> load_dataset(const ExperimentConfig& config);

// Final states of one replay. The oracle community reads the platform's
// real map, so the parts live behind stable pointers.
struct ReplayResult {
  std::unique_ptr<Platform> platform;
  std::unique_ptr<Community> community;  // auxiliary map
  std::unique_ptr<Community> oracle;     // real map
  std::unique_ptr<Ledger> ledger;        // null when not recorded
};

// Applies every record in seq order; each purchase and its disclosure go
// into one ledger block. Members' records among the first init_fraction of
// the timeline initialize both communities; later member purchases update
// them.
ReplayResult run_replay(const std::vector<RatingRecord>& records,
                        const std::set<UserId>& members,
                        const PlatformConfig& platform,
                        const BackendConfig& backend, bool record_ledger = true,
                        double init_fraction = 0.0);

ReplayResult run_replay(const ExperimentConfig& config,
                        const std::vector<RatingRecord>& records, double fraction);

// Per-item clusters of an oracle community over the same replay.
std::map<ItemId, PerItemCluster> oracle_clusters(const std::vector<RatingRecord>& records,
                                                 const std::set<UserId>& members);

// Group-one members in id order.
std::vector<UserId> group_one_members(const Community& community);

// Victims chosen by the config's policy.
std::vector<UserId> select_victims(const ExperimentConfig& config,
                                   const Community& community);

// Full probing run against one victim on copies of the replay state, then
// judge verification of every evidence.
struct AuditResult {
  UserId victim;
  ProbeOutcome outcome;
  std::vector<EvidenceCheck> checks;
  Verdict verdict;
  std::optional<ReExecution> re_execution;
  Ledger ledger;  // the replay ledger extended by the audit
};

AuditResult audit_victim(const ReplayResult& replay, const UserId& victim,
                         int max_rounds, std::uint64_t seed,
                         const SelectionOptions& options = {});

// Cell of a report table; doubles carry their print precision.
struct Cell {
  std::variant<std::string, long long, double> value;
  int precision = 1;

  Cell(std::string s) : value(std::move(s)) {}  // NOLINT
  Cell(const char* s) : value(std::string(s)) {}  // NOLINT
  Cell(long long v) : value(v) {}  // NOLINT
  Cell(std::size_t v) : value(static_cast<long long>(v)) {}  // NOLINT
  Cell(int v) : value(static_cast<long long>(v)) {}  // NOLINT
  Cell(double v, int prec = 1) : value(v), precision(prec) {}  // NOLINT

  std::string text() const;
};

struct ReportTable {
  std::string name;
  std::vector<std::string> headers;
  std::vector<std::vector<Cell>> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

// One replay per community fraction.
struct FractionRun {
  double fraction = 0.0;
  ReplayResult replay;
};

std::vector<FractionRun> run_fractions(const ExperimentConfig& config,
                                       const std::vector<RatingRecord>& records);

std::string fraction_label(double fraction);

ReportTable table_cluster_agreement(const std::vector<FractionRun>& runs,
                                    const SelectionOptions& options = {});
ReportTable table_group_proportions(const std::vector<FractionRun>& runs);

struct SuccessSummary {
  std::size_t victims = 0;           // group-one members with targets
  std::size_t victims_no_target = 0;
  double mean_rate = 0.0;            // per-victim average
  SuccessRate pooled;                // sum of M over sum of N
};

SuccessSummary success_summary(const ReplayResult& replay,
                               const std::vector<UserId>& victims,
                               const SelectionOptions& options = {});

ReportTable table_success_rate(const ExperimentConfig& config,
                               const std::vector<FractionRun>& runs);

struct DisjointnessSummary {
  std::size_t probes = 0;
  std::size_t disjoint_aux = 0;
  std::size_t disjoint_oracle = 0;
};

DisjointnessSummary disjointness_summary(const ReplayResult& replay,
                                         const std::vector<UserId>& victims,
                                         const SelectionOptions& options = {});

ReportTable table_disjointness(const ExperimentConfig& config,
                               const std::vector<FractionRun>& runs);

ReportTable table_sparsity(const std::vector<RatingRecord>& records);

// Wall-clock seconds for plaintext and shared map construction plus their
// largest entry difference. Times are measured, not deterministic.
ReportTable bench_mpc(const ExperimentConfig& config,
                      const std::vector<RatingRecord>& records);

}  // namespace stopaudit

#endif  // STOPAUDIT_HARNESS_H_
