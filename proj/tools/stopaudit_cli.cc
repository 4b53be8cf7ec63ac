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

// Command-line driver: replay, report, judge verify, synth.
//
// Exit codes: 0 success, 1 usage, 2 data error. `judge verify` returns 0
// (not proven), 10 (violation) or 2 (integrity error).

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stopaudit/harness.h"
#include "stopaudit/serialize.h"

namespace fs = std::filesystem;
using namespace stopaudit;

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;

ExperimentConfig load_config(const std::string& path) {
  return config_from_json(read_json_file(path));
}

void emit(const ReportTable& t, const std::string& out_dir, const std::string& stem) {
  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / (stem + ".csv")).string(), t.to_csv());
  write_text_file((fs::path(out_dir) / (stem + ".txt")).string(), t.to_text());
  std::cout << t.to_text();
}

// Replays each fraction, audits every selected victim and writes the
// evidence bundle of the first audited one.
int cmd_replay(const std::string& config_path) {
  const ExperimentConfig config = load_config(config_path);
  const auto records = load_dataset(config);
  fs::create_directories(config.out_dir);
  std::cout << table_sparsity(records).to_text();

  for (double f : config.fractions) {
    const ReplayResult r = run_replay(config, records, f);
    const auto victims = select_victims(config, *r.community);
    std::size_t violations = 0, audited = 0;
    bool bundle_written = false;
    for (const auto& v : victims) {
      const AuditResult a = audit_victim(r, v, config.max_rounds, config.platform.seed,
                                         config.selection());
      if (a.outcome.evidences.empty()) continue;
      ++audited;
      violations += a.verdict.decision == Decision::kViolation;
      if (bundle_written) continue;
      bundle_written = true;
      const std::string label = fraction_label(f);
      const fs::path dir =
          fs::path(config.out_dir) / ("fraction-" + label.substr(0, label.find('%')));
      fs::create_directories(dir);
      nlohmann::json ev = nlohmann::json::array();
      for (const auto& e : a.outcome.evidences) ev.push_back(evidence_to_json(e));
      write_text_file((dir / "evidence.json").string(), ev.dump(2) + "\n");
      write_text_file((dir / "chain.json").string(), chain_to_json(a.ledger.chain()).dump() + "\n");
      write_text_file((dir / "entries.jsonl").string(), entries_to_jsonl(a.ledger.entries()));
      write_text_file((dir / "community.json").string(), a.outcome.community_export);
      write_text_file((dir / "verdict.json").string(),
                      verdict_to_json(a.verdict).dump(2) + "\n");
    }
    std::cout << fraction_label(f) << ": members " << r.community->members().size()
              << ", victims " << victims.size() << ", audited " << audited
              << ", violation verdicts " << violations << ", ledger head "
              << to_hex(r.ledger->head()) << "\n";
  }
  return 0;
}

int cmd_report(const std::string& which, const std::string& config_path,
               const std::string& out_dir) {
  const ExperimentConfig config = load_config(config_path);
  const auto records = load_dataset(config);
  if (which == "bench-mpc") {
    emit(bench_mpc(config, records), out_dir, which);
    return 0;
  }
  const auto runs = run_fractions(config, records);
  if (which == "cluster-agreement") {
    emit(table_cluster_agreement(runs, config.selection()), out_dir, which);
  } else if (which == "groups") {
    emit(table_group_proportions(runs), out_dir, which);
  } else if (which == "success-rate") {
    emit(table_success_rate(config, runs), out_dir, which);
  } else {
    emit(table_disjointness(config, runs), out_dir, which);
  }
  return 0;
}

int cmd_judge(const std::string& evidence_path, const std::string& chain_path,
              const std::string& entries_path, std::size_t metadata_s) {
  if (metadata_s == 0) {
    std::cerr << "error: --metadata-s must be positive\n";
    return kUsage;
  }
  const nlohmann::json ej = read_json_file(evidence_path);
  std::vector<Evidence> evidences;
  if (ej.is_array()) {
    for (const auto& e : ej) evidences.push_back(evidence_from_json(e));
  } else {
    evidences.push_back(evidence_from_json(ej));
  }
  JudgeLedger ledger;
  ledger.chain = chain_from_json(read_json_file(chain_path));
  ledger.entries = entries_from_jsonl(read_text_file(entries_path));

  std::vector<EvidenceCheck> checks;
  for (std::size_t i = 0; i < evidences.size(); ++i) {
    checks.push_back(verify_evidence(evidences[i], ledger, metadata_s, i));
  }
  const Verdict v = adjudicate(checks, metadata_s);
  std::cout << verdict_to_json(v).dump(2) << "\n";
  return v.exit_code();
}

int cmd_synth(const SynthParams& p, const std::string& out, const std::string& format) {
  const auto records = synthesize_dataset(p);
  write_text_file(out, serialize_records(records, parse_format(format)));
  std::cout << stats_to_json(sparsity_stats(records, p.n_users, p.n_items)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stop-request audit simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";

  auto* replay = app.add_subcommand("replay", "Replay a dataset and audit victims");
  replay->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* report = app.add_subcommand("report", "Emit an evaluation table");
  std::string which;
  report->add_option("table", which, "Table to emit")
      ->required()
      ->check(CLI::IsMember(
          {"cluster-agreement", "groups", "success-rate", "disjointness", "bench-mpc"}));
  report->add_option("--config", config_path, "Experiment config (JSON)")->required();
  report->add_option("--out", out_dir, "Output directory");

  auto* judge = app.add_subcommand("judge", "Judge-side verification");
  judge->require_subcommand(1);
  auto* verify = judge->add_subcommand("verify", "Verify evidence and issue a verdict");
  std::string evidence_path, chain_path, entries_path;
  std::size_t metadata_s = 0;
  verify->add_option("--evidence", evidence_path, "Evidence JSON (object or array)")
      ->required();
  verify->add_option("--chain", chain_path, "Chain export (JSON)")->required();
  verify->add_option("--entries", entries_path, "Entry store (JSON Lines)")->required();
  verify->add_option("--metadata-s", metadata_s, "Platform cluster size S")->required();

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  SynthParams p;
  std::string synth_out, synth_format = "jsonl";
  synth->add_option("--users", p.n_users)->required();
  synth->add_option("--items", p.n_items)->required();
  synth->add_option("--records", p.n_records)->required();
  synth->add_option("--seed", p.seed)->required();
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--format", synth_format)->check(CLI::IsMember({"jsonl", "csv"}));
  synth->add_option("--rating-levels", p.rating_levels);
  synth->add_option("--zipf", p.zipf_exponent);
  synth->add_option("--topics", p.n_topics);
  synth->add_option("--topic-affinity", p.topic_affinity);
  synth->add_option("--top-rating-share", p.top_rating_share);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*replay) return cmd_replay(config_path);
    if (*report) return cmd_report(which, config_path, out_dir);
    if (*verify) return cmd_judge(evidence_path, chain_path, entries_path, metadata_s);
    if (*synth) return cmd_synth(p, synth_out, synth_format);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kDataError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}
