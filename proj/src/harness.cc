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

#include "stopaudit/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "stopaudit/mpc.h"
#include "stopaudit/serialize.h"

namespace stopaudit {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw DataError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw DataError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string percent(double num, double den) {
  if (den == 0) return "n/a";
  return format_double(100.0 * num / den, 1) + "%";
}

bool disjoint(const ItemSet& a, const ItemSet& b) {
  for (const auto& x : a) {
    if (b.count(x)) return false;
  }
  return true;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (fractions.empty()) throw DataError("at least one community fraction is required");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw DataError("community fraction outside (0, 1]");
  }
  platform.validate();
  if (backend.name != "plaintext" && backend.name != "shared") {
    throw DataError("unknown similarity backend '" + backend.name + "'");
  }
  if (backend.name == "shared" && backend.n_parties < 2) {
    throw DataError("shared backend needs at least 2 parties");
  }
  if (victim_policy == VictimPolicy::kSingle && !victim) {
    throw DataError("single victim policy needs a victim id");
  }
  if (max_rounds < 1) throw DataError("max_rounds must be positive");
  if (full_clusters_only && !lemma_window) {
    throw DataError("full_clusters_only needs lemma_window");
  }
  if (!(rating_scale > 0.0)) throw DataError("rating_scale must be positive");
  if (!(init_fraction >= 0.0 && init_fraction <= 1.0)) {
    throw DataError("init_fraction outside [0, 1]");
  }
}

SelectionOptions ExperimentConfig::selection() const {
  if (!lemma_window) return {};
  SelectionOptions o =
      SelectionOptions::lemma_window(platform.cluster_size, platform.disclose_k);
  if (full_clusters_only) o.min_cluster = platform.cluster_size;
  return o;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"dataset", "synthetic", "fractions", "community_seed", "platform", "backend",
              "victims", "max_rounds", "lemma_window", "full_clusters_only", "init_fraction",
              "out_dir"},
             "config");
  ExperimentConfig c;
  if (j.contains("dataset") && j.contains("synthetic")) {
    throw DataError("config takes either 'dataset' or 'synthetic', not both");
  }
  if (auto it = j.find("dataset"); it != j.end()) {
    check_keys(*it, {"path", "format", "rating_scale"}, "dataset");
    std::string path, format = "jsonl";
    read_opt(*it, "path", path);
    if (path.empty()) throw DataError("dataset.path is required");
    c.dataset_path = path;
    read_opt(*it, "format", format);
    c.dataset_format = parse_format(format);
    read_opt(*it, "rating_scale", c.rating_scale);
  }
  if (auto it = j.find("synthetic"); it != j.end()) {
    check_keys(*it,
               {"users", "items", "records", "rating_levels", "seed", "zipf_exponent",
                "topics", "topic_affinity", "top_rating_share"},
               "synthetic");
    read_opt(*it, "users", c.synth.n_users);
    read_opt(*it, "items", c.synth.n_items);
    read_opt(*it, "records", c.synth.n_records);
    read_opt(*it, "rating_levels", c.synth.rating_levels);
    read_opt(*it, "seed", c.synth.seed);
    read_opt(*it, "zipf_exponent", c.synth.zipf_exponent);
    read_opt(*it, "topics", c.synth.n_topics);
    read_opt(*it, "topic_affinity", c.synth.topic_affinity);
    read_opt(*it, "top_rating_share", c.synth.top_rating_share);
  }
  read_opt(j, "fractions", c.fractions);
  read_opt(j, "community_seed", c.community_seed);
  if (auto it = j.find("platform"); it != j.end()) {
    check_keys(*it, {"mode", "cluster_size_S", "disclose_k", "seed"}, "platform");
    std::string mode = to_string(c.platform.mode);
    read_opt(*it, "mode", mode);
    c.platform.mode = parse_platform_mode(mode);
    read_opt(*it, "cluster_size_S", c.platform.cluster_size);
    read_opt(*it, "disclose_k", c.platform.disclose_k);
    read_opt(*it, "seed", c.platform.seed);
  }
  if (auto it = j.find("backend"); it != j.end()) {
    check_keys(*it, {"similarity_backend", "n_parties", "seed"}, "backend");
    read_opt(*it, "similarity_backend", c.backend.name);
    read_opt(*it, "n_parties", c.backend.n_parties);
    read_opt(*it, "seed", c.backend.seed);
  }
  if (auto it = j.find("victims"); it != j.end()) {
    check_keys(*it, {"policy", "victim"}, "victims");
    std::string policy = "all_group_one";
    read_opt(*it, "policy", policy);
    if (policy == "all_group_one") {
      c.victim_policy = VictimPolicy::kAllGroupOne;
    } else if (policy == "single") {
      c.victim_policy = VictimPolicy::kSingle;
    } else {
      throw DataError("unknown victim policy '" + policy + "'");
    }
    std::string victim;
    read_opt(*it, "victim", victim);
    if (!victim.empty()) c.victim = victim;
  }
  read_opt(j, "max_rounds", c.max_rounds);
  read_opt(j, "lemma_window", c.lemma_window);
  read_opt(j, "full_clusters_only", c.full_clusters_only);
  read_opt(j, "init_fraction", c.init_fraction);
  read_opt(j, "out_dir", c.out_dir);
  try {
    c.validate();
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  if (c.dataset_path) {
    j["dataset"] = {{"path", *c.dataset_path},
                    {"format", c.dataset_format == RecordFormat::kJsonl ? "jsonl" : "csv"},
                    {"rating_scale", c.rating_scale}};
  } else {
    j["synthetic"] = {{"users", c.synth.n_users},
                      {"items", c.synth.n_items},
                      {"records", c.synth.n_records},
                      {"rating_levels", c.synth.rating_levels},
                      {"seed", c.synth.seed},
                      {"zipf_exponent", c.synth.zipf_exponent},
                      {"topics", c.synth.n_topics},
                      {"topic_affinity", c.synth.topic_affinity},
                      {"top_rating_share", c.synth.top_rating_share}};
  }
  j["fractions"] = c.fractions;
  j["community_seed"] = c.community_seed;
  j["platform"] = {{"mode", to_string(c.platform.mode)},
                   {"cluster_size_S", c.platform.cluster_size},
                   {"disclose_k", c.platform.disclose_k},
                   {"seed", c.platform.seed}};
  j["backend"] = {{"similarity_backend", c.backend.name},
                  {"n_parties", c.backend.n_parties},
                  {"seed", c.backend.seed}};
  j["victims"] = {{"policy", c.victim_policy == VictimPolicy::kSingle ? "single"
                                                                       : "all_group_one"}};
  if (c.victim) j["victims"]["victim"] = *c.victim;
  j["max_rounds"] = c.max_rounds;
  j["lemma_window"] = c.lemma_window;
  j["full_clusters_only"] = c.full_clusters_only;
  j["init_fraction"] = c.init_fraction;
  j["out_dir"] = c.out_dir;
  return j;
}

std::vector<RatingRecord> load_dataset(const ExperimentConfig& config) {
  if (!config.dataset_path) return synthesize_dataset(config.synth);
  // load_records already divides by the rating scale.
  return deduplicate(
      load_records(*config.dataset_path, config.dataset_format, config.rating_scale));
}

ReplayResult run_replay(const std::vector<RatingRecord>& records,
                        const std::set<UserId>& members,
                        const PlatformConfig& platform_config,
                        const BackendConfig& backend, bool record_ledger,
                        double init_fraction) {
  if (!(init_fraction >= 0.0 && init_fraction <= 1.0)) {
    throw Error("init_fraction outside [0, 1]");
  }
  auto impl = mpc::make_backend(backend.name, backend.n_parties, backend.seed);
  ReplayResult r;
  r.platform = std::make_unique<Platform>(platform_config);
  r.community = std::make_unique<Community>(members, impl->aggregator());
  r.oracle = std::make_unique<Community>(members);
  r.oracle->bind_reference_map(&r.platform->real_map());
  if (record_ledger) r.ledger = std::make_unique<Ledger>();

  std::vector<const RatingRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& rec : records) ordered.push_back(&rec);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const RatingRecord* a, const RatingRecord* b) { return a->seq < b->seq; });

  const auto n_init = static_cast<std::size_t>(
      std::llround(init_fraction * static_cast<double>(ordered.size())));
  std::vector<RatingRecord> initial;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const RatingRecord* rec = ordered[i];
    if (i == n_init) {
      r.community->init_from_histories(initial);
      r.oracle->init_from_histories(initial);
    }
    const Disclosure d = r.platform->record_purchase(rec->user, rec->item, rec->rating);
    if (r.ledger) {
      r.ledger->append(
          {{rec->user, rec->item, rec->rating, d.trigger_seq, EntryKind::kPurchase, ""},
           {rec->user, rec->item, 0.0, d.trigger_seq, EntryKind::kDisclosure,
            encode_item_list(d.items)}});
    }
    if (!members.count(rec->user)) continue;
    if (i < n_init) {
      initial.push_back({rec->user, rec->item, rec->rating, d.trigger_seq});
    } else {
      r.community->on_member_purchase(rec->user, rec->item, rec->rating, d.trigger_seq,
                                      d.items);
      r.oracle->on_member_purchase(rec->user, rec->item, rec->rating, d.trigger_seq,
                                   d.items);
    }
  }
  if (n_init >= ordered.size()) {
    r.community->init_from_histories(initial);
    r.oracle->init_from_histories(initial);
  }
  r.oracle->sync_with_reference();
  return r;
}

ReplayResult run_replay(const ExperimentConfig& config,
                        const std::vector<RatingRecord>& records, double fraction) {
  const auto sample = sample_community(records, fraction, config.community_seed);
  return run_replay(records, sample.members, config.platform, config.backend, true,
                    config.init_fraction);
}

std::map<ItemId, PerItemCluster> oracle_clusters(const std::vector<RatingRecord>& records,
                                                 const std::set<UserId>& members) {
  auto r = run_replay(records, members, PlatformConfig{}, BackendConfig{}, false);
  return r.oracle->clusters();
}

std::vector<UserId> group_one_members(const Community& community) {
  std::vector<UserId> out;
  for (const auto& m : community.members()) {
    if (community.observations_for_user(m).empty()) continue;
    if (community.classify_user(m) == UserGroup::kGroupOne) out.push_back(m);
  }
  return out;
}

std::vector<UserId> select_victims(const ExperimentConfig& config,
                                   const Community& community) {
  if (config.victim_policy == VictimPolicy::kSingle) {
    if (!community.is_member(*config.victim)) {
      throw DataError("victim " + *config.victim + " is not a community member");
    }
    return {*config.victim};
  }
  return group_one_members(community);
}

AuditResult audit_victim(const ReplayResult& replay, const UserId& victim,
                         int max_rounds, std::uint64_t seed,
                         const SelectionOptions& options) {
  Platform platform = *replay.platform;
  Community community = *replay.community;
  Ledger ledger = replay.ledger ? *replay.ledger : Ledger{};

  AuditResult out;
  out.victim = victim;
  Rng rng(derive_seed(seed, victim));
  out.outcome = probe_until_success(platform, community, &ledger, victim, max_rounds, rng,
                                    options);

  const std::size_t s = platform.config().cluster_size;
  const JudgeLedger view{ledger.chain(), ledger.entries(), ledger.head()};
  for (std::size_t i = 0; i < out.outcome.evidences.size(); ++i) {
    out.checks.push_back(verify_evidence(out.outcome.evidences[i], view, s, i));
  }
  out.verdict = adjudicate(out.checks, s);
  if (out.outcome.community_ref) {
    out.re_execution = re_execute_detector(out.outcome.community_export, view,
                                           *out.outcome.community_ref, victim,
                                           out.outcome.evidences, s, options);
  }
  out.ledger = std::move(ledger);
  return out;
}

std::string Cell::text() const {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* i = std::get_if<long long>(&value)) return std::to_string(*i);
  return format_double(std::get<double>(value), precision);
}

std::string ReportTable::to_csv() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  std::string out;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    out += (i ? "," : "") + quote(headers[i]);
  }
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += (i ? "," : "") + quote(row[i].text());
    }
    out += "\n";
  }
  return out;
}

std::string ReportTable::to_text() const {
  std::vector<std::size_t> width(headers.size(), 0);
  for (std::size_t i = 0; i < headers.size(); ++i) width[i] = headers[i].size();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].text().size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::string c = cells[i];
      if (i + 1 < cells.size()) c.resize(std::max(c.size(), width[i]), ' ');
      out += (i ? "  " : "") + c;
    }
    return out + "\n";
  };
  std::string out = name + "\n";
  out += line(headers);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto& c : row) cells.push_back(c.text());
    out += line(cells);
  }
  return out;
}

std::vector<FractionRun> run_fractions(const ExperimentConfig& config,
                                       const std::vector<RatingRecord>& records) {
  std::vector<FractionRun> runs;
  for (double f : config.fractions) runs.push_back({f, run_replay(config, records, f)});
  return runs;
}

std::string fraction_label(double fraction) {
  const double pct = 100.0 * fraction;
  if (std::fabs(pct - std::round(pct)) < 1e-9) {
    return std::to_string(static_cast<long long>(std::llround(pct))) + "% User";
  }
  return format_double(pct, 1) + "% User";
}

namespace {

std::vector<std::string> fraction_headers(const std::vector<FractionRun>& runs) {
  std::vector<std::string> h{"metric"};
  for (const auto& r : runs) h.push_back(fraction_label(r.fraction));
  return h;
}

}  // namespace

ReportTable table_cluster_agreement(const std::vector<FractionRun>& runs,
                                    const SelectionOptions& options) {
  ReportTable t;
  t.name = "cluster-agreement";
  t.headers = fraction_headers(runs);
  std::vector<Cell> targets{"target items"}, same{"same clusters"}, aux{"avg size (aux)"},
      real{"avg size (real)"}, same_size{"avg size (same)"};
  for (const auto& run : runs) {
    const auto picked = select_target_items(*run.replay.community, std::nullopt, options);
    std::size_t n_same = 0;
    double aux_total = 0, real_total = 0, same_total = 0;
    for (const auto& tgt : picked) {
      const ItemSet a = tgt.cluster.members;
      const ItemSet o = run.replay.oracle->cluster_snapshot(tgt.item).members;
      aux_total += a.size();
      real_total += o.size();
      if (a == o) {
        ++n_same;
        same_total += a.size();
      }
    }
    const double n = static_cast<double>(picked.size());
    targets.emplace_back(picked.size());
    same.emplace_back(std::to_string(n_same) + " (" + percent(n_same, n) + ")");
    aux.emplace_back(n ? Cell(aux_total / n) : Cell("n/a"));
    real.emplace_back(n ? Cell(real_total / n) : Cell("n/a"));
    same_size.emplace_back(n_same ? Cell(same_total / n_same) : Cell("n/a"));
  }
  t.rows = {targets, same, aux, real, same_size};
  return t;
}

ReportTable table_group_proportions(const std::vector<FractionRun>& runs) {
  ReportTable t;
  t.name = "groups";
  t.headers = fraction_headers(runs);
  std::vector<Cell> members{"members observed"}, pct{"group one"}, lmin{"min length"},
      lmax{"max length"}, lavg{"avg length"};
  for (const auto& run : runs) {
    const Community& c = *run.replay.community;
    std::size_t observed = 0;
    for (const auto& m : c.members()) observed += !c.observations_for_user(m).empty();
    const auto g1 = group_one_members(c);
    members.emplace_back(observed);
    pct.emplace_back(percent(g1.size(), observed));
    if (g1.empty()) {
      lmin.emplace_back("n/a");
      lmax.emplace_back("n/a");
      lavg.emplace_back("n/a");
      continue;
    }
    std::size_t lo = SIZE_MAX, hi = 0, sum = 0;
    for (const auto& u : g1) {
      const std::size_t len = c.history(u).size();
      lo = std::min(lo, len);
      hi = std::max(hi, len);
      sum += len;
    }
    lmin.emplace_back(lo);
    lmax.emplace_back(hi);
    lavg.emplace_back(static_cast<double>(sum) / g1.size());
  }
  t.rows = {members, pct, lmin, lmax, lavg};
  return t;
}

SuccessSummary success_summary(const ReplayResult& replay,
                               const std::vector<UserId>& victims,
                               const SelectionOptions& options) {
  SuccessSummary s;
  double rate_sum = 0;
  for (const auto& v : victims) {
    if (select_target_items(*replay.community, v, options).empty()) {
      ++s.victims_no_target;
      continue;
    }
    const SuccessRate r = one_round_success_rate(*replay.platform, *replay.community, v, options);
    ++s.victims;
    rate_sum += r.rate();
    s.pooled.triggered += r.triggered;
    s.pooled.targets += r.targets;
  }
  if (s.victims) s.mean_rate = rate_sum / s.victims;
  return s;
}

ReportTable table_success_rate(const ExperimentConfig& config,
                               const std::vector<FractionRun>& runs) {
  ReportTable t;
  t.name = "success-rate (" + to_string(config.platform.mode) + ")";
  t.headers = fraction_headers(runs);
  std::vector<Cell> victims{"victims"}, skipped{"victims without targets"},
      mean{"success rate (per-victim mean)"}, pooled{"success rate (pooled M/N)"},
      mn{"M / N"};
  const SelectionOptions options = config.selection();
  for (const auto& run : runs) {
    const auto vs = select_victims(config, *run.replay.community);
    const SuccessSummary s = success_summary(run.replay, vs, options);
    victims.emplace_back(s.victims);
    skipped.emplace_back(s.victims_no_target);
    if (s.victims == 0) {
      mean.emplace_back("n/a");
      pooled.emplace_back("n/a");
      mn.emplace_back("n/a");
      continue;
    }
    mean.emplace_back(percent(s.mean_rate, 1.0));
    pooled.emplace_back(percent(s.pooled.triggered, s.pooled.targets));
    mn.emplace_back(std::to_string(s.pooled.triggered) + " / " +
                    std::to_string(s.pooled.targets));
  }
  t.rows = {victims, skipped, mean, pooled, mn};
  return t;
}

DisjointnessSummary disjointness_summary(const ReplayResult& replay,
                                         const std::vector<UserId>& victims,
                                         const SelectionOptions& options) {
  DisjointnessSummary s;
  for (const auto& v : victims) {
    const ItemSet hist_aux = replay.community->history_cluster(v);
    const ItemSet hist_oracle = replay.oracle->history_cluster(v);
    for (const auto& tgt : select_target_items(*replay.community, v, options)) {
      ++s.probes;
      ItemSet aux = tgt.cluster.members;
      aux.insert(tgt.item);
      ItemSet real = replay.oracle->cluster_snapshot(tgt.item).members;
      real.insert(tgt.item);
      s.disjoint_aux += disjoint(aux, hist_aux);
      s.disjoint_oracle += disjoint(real, hist_oracle);
    }
  }
  return s;
}

ReportTable table_disjointness(const ExperimentConfig& config,
                               const std::vector<FractionRun>& runs) {
  ReportTable t;
  t.name = "disjointness";
  t.headers = fraction_headers(runs);
  std::vector<Cell> probes{"probing items"}, aux{"disjoint (aux map)"},
      real{"disjoint (real map)"};
  const SelectionOptions options = config.selection();
  for (const auto& run : runs) {
    const auto vs = select_victims(config, *run.replay.community);
    const auto s = disjointness_summary(run.replay, vs, options);
    probes.emplace_back(s.probes);
    aux.emplace_back(percent(s.disjoint_aux, s.probes));
    real.emplace_back(percent(s.disjoint_oracle, s.probes));
  }
  t.rows = {probes, aux, real};
  return t;
}

ReportTable table_sparsity(const std::vector<RatingRecord>& records) {
  const DatasetStats st = sparsity_stats(records);
  ReportTable t;
  t.name = "sparsity";
  t.headers = {"users", "items", "records", "sparsity"};
  t.rows = {{st.n_users, st.n_items, st.n_records, Cell(st.sparsity, 6)}};
  return t;
}

ReportTable bench_mpc(const ExperimentConfig& config,
                      const std::vector<RatingRecord>& records) {
  using clock = std::chrono::steady_clock;
  ReportTable t;
  t.name = "bench-mpc";
  t.headers = {"backend", "seconds", "pairs", "max abs diff", "ratio"};

  const auto t0 = clock::now();
  const SimilarityMap plain = build_similarity(records);
  const double plain_s = std::chrono::duration<double>(clock::now() - t0).count();
  t.rows.push_back({"plaintext", Cell(plain_s, 3), plain.pair_count(), Cell(0.0, 6),
                    Cell(1.0, 2)});
  if (config.backend.name == "plaintext") return t;

  const auto t1 = clock::now();
  const SimilarityMap shared =
      mpc::mpc_build_similarity(records, config.backend.n_parties, config.backend.seed);
  const double shared_s = std::chrono::duration<double>(clock::now() - t1).count();
  t.rows.push_back({"shared", Cell(shared_s, 3), shared.pair_count(),
                    Cell(plain.max_abs_diff(shared), 6),
                    plain_s > 0 ? Cell(shared_s / plain_s, 2) : Cell("n/a")});
  return t;
}

}  // namespace stopaudit
