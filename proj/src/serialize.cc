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

#include "stopaudit/serialize.h"

#include <fstream>
#include <sstream>

namespace stopaudit {
namespace {

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad field '") + key + "': " + e.what());
  }
}

json observation_to_json(const Observation& o) {
  return {{"user", o.user},
          {"item", o.item},
          {"seq", o.seq},
          {"disclosed", o.disclosed},
          {"first", o.first_purchase},
          {"contained", o.contained}};
}

Observation observation_from_json(const json& j) {
  Observation o;
  o.user = field<std::string>(j, "user");
  o.item = field<std::string>(j, "item");
  o.seq = field<Seq>(j, "seq");
  o.disclosed = field<std::vector<std::string>>(j, "disclosed");
  o.first_purchase = field<bool>(j, "first");
  o.contained = field<bool>(j, "contained");
  return o;
}

std::string payload_hex(const std::string& payload) {
  return to_hex(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()));
}

std::string payload_from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw DataError("odd-length payload hex");
  std::string out;
  out.reserve(hex.size() / 2);
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DataError("bad hex digit in payload");
  };
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
  }
  return out;
}

}  // namespace

json evidence_to_json(const Evidence& e) {
  return {{"victim", e.victim},
          {"probe", e.probe},
          {"A", std::vector<std::string>(e.a.begin(), e.a.end())},
          {"B", e.b},
          {"S", e.s},
          {"undisclosed", e.undisclosed},
          {"lemma_triggered", e.lemma_triggered},
          {"overlap", std::vector<std::string>(e.overlap.begin(), e.overlap.end())},
          {"ledger_refs", e.ledger_refs},
          {"round", e.round}};
}

Evidence evidence_from_json(const json& j) {
  if (!j.is_object()) throw DataError("evidence must be a JSON object");
  Evidence e;
  e.victim = field<std::string>(j, "victim");
  e.probe = field<std::string>(j, "probe");
  auto a = field<std::vector<std::string>>(j, "A");
  e.a = ItemSet(a.begin(), a.end());
  e.b = field<std::vector<std::string>>(j, "B");
  e.s = field<std::size_t>(j, "S");
  e.undisclosed = field<std::size_t>(j, "undisclosed");
  e.lemma_triggered = field<bool>(j, "lemma_triggered");
  auto o = field<std::vector<std::string>>(j, "overlap");
  e.overlap = ItemSet(o.begin(), o.end());
  e.ledger_refs = field<std::vector<std::size_t>>(j, "ledger_refs");
  e.round = field<int>(j, "round");
  return e;
}

json community_to_json(const Community& c) {
  json aux = json::array();
  c.aux_map().for_each_pair([&](const ItemId& a, const ItemId& b, double s) {
    aux.push_back(json::array({a, b, s}));
  });
  json clusters = json::array();
  for (const auto& [item, cluster] : c.clusters()) {
    json members = json::array();
    for (const auto& [m, tag] : cluster.members) {
      members.push_back({{"item", m}, {"tag", to_string(tag)}});
    }
    clusters.push_back({{"item", item}, {"members", members}});
  }
  json histories = json::object();
  for (const auto& [user, hist] : c.histories()) {
    json rows = json::array();
    for (const auto& h : hist) rows.push_back(json::array({h.item, h.rating, h.seq}));
    histories[user] = rows;
  }
  json stops = json::object();
  for (const auto& [user, seq] : c.stops()) stops[user] = seq;
  json observed = json::array();
  for (const auto& o : c.observations()) observed.push_back(observation_to_json(o));
  json probes = json::array();
  for (const auto& o : c.probes()) probes.push_back(observation_to_json(o));
  return {{"members", std::vector<std::string>(c.members().begin(), c.members().end())},
          {"aux_map", aux},
          {"clusters", clusters},
          {"histories", histories},
          {"stops", stops},
          {"observations", observed},
          {"probes", probes}};
}

Community community_from_json(const json& j) {
  if (!j.is_object()) throw DataError("community export must be a JSON object");
  auto member_list = field<std::vector<std::string>>(j, "members");
  std::set<UserId> members(member_list.begin(), member_list.end());

  SimilarityMap aux;
  for (const auto& row : field<json>(j, "aux_map")) {
    if (!row.is_array() || row.size() != 3) throw DataError("bad aux_map row");
    aux.set(row[0].get<std::string>(), row[1].get<std::string>(), row[2].get<double>());
  }

  std::map<ItemId, PerItemCluster> clusters;
  for (const auto& cj : field<json>(j, "clusters")) {
    PerItemCluster c;
    c.anchor = field<std::string>(cj, "item");
    for (const auto& mj : field<json>(cj, "members")) {
      c.members[field<std::string>(mj, "item")] =
          parse_provenance(field<std::string>(mj, "tag"));
    }
    aux.add_item(c.anchor);
    clusters[c.anchor] = std::move(c);
  }

  std::map<UserId, History> histories;
  const json history_obj = field<json>(j, "histories");
  for (const auto& [user, rows] : history_obj.items()) {
    History h;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != 3) throw DataError("bad history row");
      h.push_back({row[0].get<std::string>(), row[1].get<double>(), row[2].get<Seq>()});
    }
    histories[user] = std::move(h);
  }

  std::map<UserId, Seq> stops;
  const json stop_obj = field<json>(j, "stops");
  for (const auto& [user, seq] : stop_obj.items()) {
    stops[user] = seq.get<Seq>();
  }

  std::vector<Observation> observed, probes;
  for (const auto& o : field<json>(j, "observations")) observed.push_back(observation_from_json(o));
  for (const auto& o : field<json>(j, "probes")) probes.push_back(observation_from_json(o));

  return Community::restore(std::move(members), std::move(aux), std::move(clusters),
                            std::move(histories), std::move(stops), std::move(observed),
                            std::move(probes));
}

std::string canonical_community_export(const Community& c) {
  return community_to_json(c).dump();
}

Digest community_digest(std::string_view canonical_export) {
  return sha256(canonical_export);
}

json chain_to_json(const std::vector<LedgerBlock>& chain) {
  json out = json::array();
  for (const auto& b : chain) {
    json commitments = json::array();
    for (const auto& c : b.commitments) commitments.push_back(to_hex(c));
    out.push_back({{"index", b.index},
                   {"prev_hash", to_hex(b.prev_hash)},
                   {"commitments", commitments},
                   {"block_hash", to_hex(b.block_hash)}});
  }
  return out;
}

std::vector<LedgerBlock> chain_from_json(const json& j) {
  if (!j.is_array()) throw DataError("chain export must be a JSON array");
  std::vector<LedgerBlock> chain;
  for (const auto& bj : j) {
    LedgerBlock b;
    b.index = field<std::uint64_t>(bj, "index");
    b.prev_hash = digest_from_hex(field<std::string>(bj, "prev_hash"));
    for (const auto& c : field<std::vector<std::string>>(bj, "commitments")) {
      b.commitments.push_back(digest_from_hex(c));
    }
    b.block_hash = digest_from_hex(field<std::string>(bj, "block_hash"));
    chain.push_back(std::move(b));
  }
  return chain;
}

std::string entries_to_jsonl(const std::vector<TransactionEntry>& entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    json row = {{"position", i},
                {"kind", to_string(e.kind)},
                {"buyer", e.buyer},
                {"itemID", e.item_id},
                {"rate", e.rate},
                {"transactionTime", e.transaction_time},
                {"payload", payload_hex(e.payload)}};
    out += row.dump() + "\n";
  }
  return out;
}

std::vector<TransactionEntry> entries_from_jsonl(std::string_view text) {
  std::vector<TransactionEntry> out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    const auto position = field<std::size_t>(row, "position");
    if (position != out.size()) {
      throw DataError("entry positions must be consecutive from 0", line_no);
    }
    TransactionEntry e;
    e.kind = parse_entry_kind(field<std::string>(row, "kind"));
    e.buyer = field<std::string>(row, "buyer");
    e.item_id = field<std::string>(row, "itemID");
    e.rate = field<double>(row, "rate");
    e.transaction_time = field<Seq>(row, "transactionTime");
    e.payload = payload_from_hex(field<std::string>(row, "payload"));
    out.push_back(std::move(e));
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace stopaudit
