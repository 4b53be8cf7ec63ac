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

// Python bindings. Structured results cross the boundary as JSON text; the
// package wrapper decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "stopaudit/harness.h"
#include "stopaudit/mpc.h"
#include "stopaudit/rng.h"
#include "stopaudit/serialize.h"

namespace py = pybind11;
using namespace stopaudit;

namespace {

using Row = std::tuple<std::string, std::string, double, Seq>;

std::vector<Row> to_rows(const std::vector<RatingRecord>& records) {
  std::vector<Row> out;
  out.reserve(records.size());
  for (const auto& r : records) out.emplace_back(r.user, r.item, r.rating, r.seq);
  return out;
}

std::vector<RatingRecord> from_rows(const std::vector<Row>& rows) {
  std::vector<RatingRecord> out;
  out.reserve(rows.size());
  for (const auto& [u, i, r, s] : rows) out.push_back({u, i, r, s});
  return out;
}

std::map<std::pair<std::string, std::string>, double> to_dict(const SimilarityMap& m) {
  std::map<std::pair<std::string, std::string>, double> out;
  m.for_each_pair([&](const ItemId& a, const ItemId& b, double s) { out[{a, b}] = s; });
  return out;
}

std::string run_experiment(const std::string& config_text) {
  const ExperimentConfig config = config_from_json(json::parse(config_text));
  const auto records = load_dataset(config);
  json out = json::array();
  for (double f : config.fractions) {
    const ReplayResult r = run_replay(config, records, f);
    const auto victims = select_victims(config, *r.community);
    std::size_t audited = 0, violations = 0;
    for (const auto& v : victims) {
      const AuditResult a = audit_victim(r, v, config.max_rounds, config.platform.seed,
                                         config.selection());
      if (a.outcome.evidences.empty()) continue;
      ++audited;
      violations += a.verdict.decision == Decision::kViolation;
    }
    const SuccessSummary s = success_summary(r, victims, config.selection());
    out.push_back({{"fraction", f},
                   {"members", r.community->members().size()},
                   {"victims", victims.size()},
                   {"audited", audited},
                   {"violation_verdicts", violations},
                   {"success_mean", s.mean_rate},
                   {"success_pooled", s.pooled.rate()},
                   {"ledger_head", to_hex(r.ledger->head())}});
  }
  return out.dump();
}

// Evidence bundle of the first victim whose audit produced evidence, or
// "null".
std::string audit_bundle(const std::string& config_text, double fraction) {
  const ExperimentConfig config = config_from_json(json::parse(config_text));
  const auto records = load_dataset(config);
  const ReplayResult r = run_replay(config, records, fraction);
  for (const auto& v : select_victims(config, *r.community)) {
    const AuditResult a = audit_victim(r, v, config.max_rounds, config.platform.seed,
                                       config.selection());
    if (a.outcome.evidences.empty()) continue;
    json ev = json::array();
    for (const auto& e : a.outcome.evidences) ev.push_back(evidence_to_json(e));
    return json{{"victim", v},
                {"evidence", ev},
                {"chain", chain_to_json(a.ledger.chain())},
                {"entries", entries_to_jsonl(a.ledger.entries())},
                {"community", a.outcome.community_export},
                {"verdict", verdict_to_json(a.verdict)}}
        .dump();
  }
  return "null";
}

std::string report(const std::string& which, const std::string& config_text) {
  const ExperimentConfig config = config_from_json(json::parse(config_text));
  const auto records = load_dataset(config);
  if (which == "bench-mpc") return bench_mpc(config, records).to_csv();
  if (which == "sparsity") return table_sparsity(records).to_csv();
  const auto runs = run_fractions(config, records);
  if (which == "cluster-agreement") return table_cluster_agreement(runs, config.selection()).to_csv();
  if (which == "groups") return table_group_proportions(runs).to_csv();
  if (which == "success-rate") return table_success_rate(config, runs).to_csv();
  if (which == "disjointness") return table_disjointness(config, runs).to_csv();
  throw DataError("unknown table '" + which + "'");
}

std::string judge_verify(const std::string& evidence_text, const std::string& chain_text,
                         const std::string& entries_jsonl, std::size_t metadata_s) {
  const json ej = json::parse(evidence_text);
  std::vector<Evidence> evidences;
  if (ej.is_array()) {
    for (const auto& e : ej) evidences.push_back(evidence_from_json(e));
  } else {
    evidences.push_back(evidence_from_json(ej));
  }
  JudgeLedger ledger;
  ledger.chain = chain_from_json(json::parse(chain_text));
  ledger.entries = entries_from_jsonl(entries_jsonl);
  std::vector<EvidenceCheck> checks;
  for (std::size_t i = 0; i < evidences.size(); ++i) {
    checks.push_back(verify_evidence(evidences[i], ledger, metadata_s, i));
  }
  json v = verdict_to_json(adjudicate(checks, metadata_s));
  v["exit_code"] = adjudicate(checks, metadata_s).exit_code();
  return v.dump();
}

}  // namespace

PYBIND11_MODULE(_stopaudit, m) {
  m.doc() = "Stop-request audit simulator";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<DataError> data_error(m, "DataError", error.ptr());
  static py::exception<IntegrityError> integrity_error(m, "IntegrityError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const IntegrityError& e) {
      py::set_error(integrity_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    } catch (const json::exception& e) {
      py::set_error(data_error, e.what());
    }
  });

  m.def(
      "synthesize",
      [](std::size_t users, std::size_t items, std::size_t records, std::uint64_t seed,
         int rating_levels, double zipf, std::size_t topics, double topic_affinity,
         double top_rating_share) {
        SynthParams p;
        p.n_users = users;
        p.n_items = items;
        p.n_records = records;
        p.seed = seed;
        p.rating_levels = rating_levels;
        p.zipf_exponent = zipf;
        p.n_topics = topics;
        p.topic_affinity = topic_affinity;
        p.top_rating_share = top_rating_share;
        return to_rows(synthesize_dataset(p));
      },
      py::arg("users"), py::arg("items"), py::arg("records"), py::arg("seed"),
      py::arg("rating_levels") = 5, py::arg("zipf") = 1.1, py::arg("topics") = 0,
      py::arg("topic_affinity") = 0.9, py::arg("top_rating_share") = -1.0,
      "Synthetic (user, item, rating, seq) records.");

  m.def(
      "parse_records",
      [](const std::string& text, const std::string& format, double scale) {
        return to_rows(parse_records(text, parse_format(format), scale));
      },
      py::arg("text"), py::arg("format") = "jsonl", py::arg("rating_scale") = 1.0);

  m.def(
      "serialize_records",
      [](const std::vector<Row>& rows, const std::string& format) {
        return serialize_records(from_rows(rows), parse_format(format));
      },
      py::arg("records"), py::arg("format") = "jsonl");

  m.def(
      "sparsity_stats",
      [](const std::vector<Row>& rows, std::optional<std::size_t> users,
         std::optional<std::size_t> items) {
        const auto recs = from_rows(rows);
        return stats_to_json(users && items ? sparsity_stats(recs, *users, *items)
                                            : sparsity_stats(recs));
      },
      py::arg("records"), py::arg("users") = std::nullopt, py::arg("items") = std::nullopt);

  m.def(
      "build_similarity",
      [](const std::vector<Row>& rows) { return to_dict(build_similarity(from_rows(rows))); },
      py::arg("records"), "Cosine map as {(a, b): s} with a < b.");

  m.def(
      "mpc_build_similarity",
      [](const std::vector<Row>& rows, std::size_t parties, std::uint64_t seed) {
        return to_dict(mpc::mpc_build_similarity(from_rows(rows), parties, seed));
      },
      py::arg("records"), py::arg("parties") = 3, py::arg("seed") = 0);

  m.def("lemma_check", &lemma_check, py::arg("a"), py::arg("b"), py::arg("cluster_size"));
  m.def("overlap_check", &overlap_check, py::arg("disclosed"), py::arg("history"));

  m.def(
      "sha256_hex", [](const py::bytes& data) { return to_hex(sha256(std::string(data))); },
      py::arg("data"));

  m.attr("MODULUS") = mpc::kModulus;
  m.def(
      "encode_fixed", [](double x) { return mpc::encode_fixed(x).value(); }, py::arg("x"));
  m.def(
      "decode_fixed", [](std::uint64_t v) { return mpc::decode_fixed(mpc::FieldElement(v)); },
      py::arg("value"));
  m.def(
      "share",
      [](std::uint64_t secret, std::size_t parties, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<std::uint64_t> out;
        for (const auto& s : mpc::share(mpc::FieldElement(secret), parties, rng).shares) {
          out.push_back(s.value());
        }
        return out;
      },
      py::arg("secret"), py::arg("parties"), py::arg("seed") = 0);
  m.def(
      "reconstruct",
      [](const std::vector<std::uint64_t>& shares) {
        mpc::ShareVector v;
        for (auto s : shares) v.shares.emplace_back(s);
        return mpc::reconstruct(v).value();
      },
      py::arg("shares"));

  py::class_<Platform>(m, "Platform")
      .def(py::init([](const std::string& mode, std::size_t s, std::size_t k, std::uint64_t seed) {
             PlatformConfig c;
             c.mode = parse_platform_mode(mode);
             c.cluster_size = s;
             c.disclose_k = k;
             c.seed = seed;
             return Platform(c);
           }),
           py::arg("mode") = "honest", py::arg("cluster_size") = 10, py::arg("disclose_k") = 7,
           py::arg("seed") = 0)
      .def(
          "record_purchase",
          [](Platform& p, const std::string& user, const std::string& item, double rating) {
            return p.record_purchase(user, item, rating).items;
          },
          py::arg("user"), py::arg("item"), py::arg("rating"))
      .def("stop_request", &Platform::stop_request, py::arg("user"))
      .def("full_recommendation_cluster", &Platform::full_recommendation_cluster, py::arg("user"))
      .def(
          "similarity",
          [](const Platform& p, const std::string& a, const std::string& b) {
            return p.real_map().similarity(a, b);
          },
          py::arg("a"), py::arg("b"))
      .def_property_readonly("clock", &Platform::clock);

  m.def("run_experiment", &run_experiment, py::arg("config_json"),
        "Replays and audits; returns a JSON summary per community fraction.");
  m.def("audit_bundle", &audit_bundle, py::arg("config_json"), py::arg("fraction"));
  m.def("report", &report, py::arg("table"), py::arg("config_json"), "Report table as CSV.");
  m.def("judge_verify", &judge_verify, py::arg("evidence_json"), py::arg("chain_json"),
        py::arg("entries_jsonl"), py::arg("metadata_s"));
}
