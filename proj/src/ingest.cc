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

#include "stopaudit/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "stopaudit/rng.h"

namespace stopaudit {
namespace {

using json = nlohmann::json;

struct RawRow {
  UserId user;
  ItemId item;
  double rating;
  std::int64_t ts;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  return s;
}

double parse_double(std::string_view s, std::size_t row) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DataError("bad rating '" + std::string(s) + "'", row);
  }
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t row) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("bad timestamp '" + std::string(s) + "'", row);
  }
  return v;
}

const json* find_key(const json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it != obj.end()) return &*it;
  }
  return nullptr;
}

RawRow parse_json_row(std::string_view line, std::size_t row) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what(), row);
  }
  if (!obj.is_object()) throw DataError("row is not a JSON object", row);
  const json* user = find_key(obj, {"user", "reviewerID"});
  const json* item = find_key(obj, {"item", "asin"});
  const json* rating = find_key(obj, {"rating", "overall"});
  const json* ts = find_key(obj, {"ts", "unixReviewTime"});
  if (!user || !item || !rating || !ts) {
    throw DataError("missing one of user/item/rating/ts", row);
  }
  if (!user->is_string() || !item->is_string()) {
    throw DataError("user and item must be strings", row);
  }
  if (!rating->is_number()) throw DataError("rating must be a number", row);
  if (!ts->is_number_integer()) throw DataError("ts must be an integer", row);
  return {user->get<std::string>(), item->get<std::string>(),
          rating->get<double>(), ts->get<std::int64_t>()};
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void check_rating(double rating, double raw_max, std::size_t row) {
  if (!(rating > 0.0) || rating > raw_max) {
    std::ostringstream os;
    os << "rating " << rating << " outside (0, " << raw_max << "]";
    throw DataError(os.str(), row);
  }
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

RecordFormat parse_format(std::string_view name) {
  if (name == "jsonl" || name == "json") return RecordFormat::kJsonl;
  if (name == "csv") return RecordFormat::kCsv;
  throw Error("unknown record format '" + std::string(name) + "'");
}

std::vector<RatingRecord> parse_records(std::string_view source,
                                        RecordFormat format, double raw_max) {
  if (!(raw_max > 0.0)) throw Error("raw_max must be positive");
  std::vector<RawRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t nl = source.find('\n', pos);
    std::string_view line = source.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (format == RecordFormat::kCsv) {
      auto fields = split_csv(line);
      if (!header_seen) {
        if (fields.size() != 4 || fields[0] != "user" || fields[1] != "item" ||
            fields[2] != "rating" || fields[3] != "ts") {
          throw DataError("expected header user,item,rating,ts", line_no);
        }
        header_seen = true;
        continue;
      }
      if (fields.size() != 4) {
        throw DataError("expected 4 fields, got " + std::to_string(fields.size()),
                        line_no);
      }
      if (fields[0].empty() || fields[1].empty()) {
        throw DataError("empty user or item", line_no);
      }
      RawRow r{std::string(fields[0]), std::string(fields[1]),
               parse_double(fields[2], line_no), parse_int(fields[3], line_no)};
      check_rating(r.rating, raw_max, line_no);
      rows.push_back(std::move(r));
    } else {
      RawRow r = parse_json_row(line, line_no);
      check_rating(r.rating, raw_max, line_no);
      rows.push_back(std::move(r));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    if (a.user != b.user) return a.user < b.user;
    return a.item < b.item;
  });
  std::vector<RatingRecord> out;
  out.reserve(rows.size());
  for (auto& r : rows) {
    out.push_back({std::move(r.user), std::move(r.item), r.rating / raw_max,
                   static_cast<Seq>(out.size())});
  }
  return out;
}

std::vector<RatingRecord> load_records(const std::string& path,
                                       RecordFormat format, double raw_max) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_records(ss.str(), format, raw_max);
}

std::string serialize_records(const std::vector<RatingRecord>& records,
                              RecordFormat format) {
  std::string out;
  if (format == RecordFormat::kCsv) {
    out += "user,item,rating,ts\n";
    for (const auto& r : records) {
      out += r.user + "," + r.item + "," + format_double(r.rating) + "," +
             std::to_string(r.seq) + "\n";
    }
  } else {
    for (const auto& r : records) {
      json row = {{"user", r.user}, {"item", r.item}, {"rating", r.rating},
                  {"ts", r.seq}};
      out += row.dump() + "\n";
    }
  }
  return out;
}

std::vector<RatingRecord> normalize_ratings(std::vector<RatingRecord> records,
                                            double raw_max) {
  if (!(raw_max > 0.0)) throw Error("raw_max must be positive");
  for (std::size_t i = 0; i < records.size(); ++i) {
    check_rating(records[i].rating, raw_max, i + 1);
    records[i].rating /= raw_max;
  }
  return records;
}

std::vector<RatingRecord> deduplicate(const std::vector<RatingRecord>& records) {
  std::set<std::pair<UserId, ItemId>> seen;
  std::vector<RatingRecord> out;
  for (const auto& r : records) {
    if (seen.emplace(r.user, r.item).second) {
      out.push_back(r);
      out.back().seq = out.size() - 1;
    }
  }
  return out;
}

DatasetStats sparsity_stats(const std::vector<RatingRecord>& records) {
  if (records.empty()) throw DataError("empty record list");
  std::unordered_set<std::string> users, items;
  for (const auto& r : records) {
    users.insert(r.user);
    items.insert(r.item);
  }
  return sparsity_stats(records, users.size(), items.size());
}

DatasetStats sparsity_stats(const std::vector<RatingRecord>& records,
                            std::size_t n_users, std::size_t n_items) {
  if (records.empty()) throw DataError("empty record list");
  DatasetStats s;
  s.n_users = n_users;
  s.n_items = n_items;
  s.n_records = records.size();
  const double cells = static_cast<double>(n_users) * static_cast<double>(n_items);
  s.sparsity = cells > 0.0 ? 1.0 - static_cast<double>(s.n_records) / cells : 0.0;
  return s;
}

std::string stats_to_json(const DatasetStats& stats) {
  json j = {{"n_users", stats.n_users},
            {"n_items", stats.n_items},
            {"n_records", stats.n_records},
            {"sparsity", stats.sparsity}};
  return j.dump();
}

CommunitySample sample_community(const std::vector<RatingRecord>& records,
                                 double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error("community fraction must be in (0, 1]");
  }
  std::set<UserId> distinct;
  for (const auto& r : records) distinct.insert(r.user);
  std::vector<UserId> users(distinct.begin(), distinct.end());
  const auto want = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(users.size())));
  Rng rng(derive_seed(seed, "community"));
  CommunitySample sample;
  sample.fraction = fraction;
  sample.seed = seed;
  for (std::size_t i : rng.sample_indices(users.size(), want)) {
    sample.members.insert(users[i]);
  }
  return sample;
}

namespace {

std::string padded(char prefix, std::size_t i, std::size_t n) {
  std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

std::vector<RatingRecord> synthesize_dataset(const SynthParams& p) {
  const double capacity =
      static_cast<double>(p.n_users) * static_cast<double>(p.n_items);
  if (p.n_users == 0 || p.n_items == 0) {
    if (p.n_records == 0) return {};
    throw Error("records requested from an empty universe");
  }
  if (static_cast<double>(p.n_records) > capacity) {
    throw Error("n_records exceeds n_users * n_items");
  }
  if (p.rating_levels < 1) throw Error("rating_levels must be >= 1");
  if (!(p.zipf_exponent >= 0.0)) throw Error("zipf exponent must be >= 0");

  if (p.n_topics > p.n_items) throw Error("more topics than items");
  if (!(p.topic_affinity >= 0.0 && p.topic_affinity <= 1.0)) {
    throw Error("topic affinity outside [0, 1]");
  }
  if (p.top_rating_share > 1.0) throw Error("top rating share above 1");

  Rng rng(p.seed);

  // Popularity rank r gets weight 1/(r+1)^s. Ranks index items, or topics
  // when there are any; a random permutation maps them to item ids so id
  // order carries no popularity or topic signal.
  const std::size_t n_units = p.n_topics > 0 ? p.n_topics : p.n_items;
  std::vector<std::size_t> rank_to_item(p.n_items);
  for (std::size_t i = 0; i < p.n_items; ++i) rank_to_item[i] = i;
  rng.shuffle(rank_to_item);
  std::vector<double> cumulative(n_units);
  double total = 0.0;
  for (std::size_t r = 0; r < n_units; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), p.zipf_exponent);
    cumulative[r] = total;
  }
  auto draw_rank = [&] {
    double x = rng.uniform01() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    return std::min<std::size_t>(it - cumulative.begin(), n_units - 1);
  };
  // Topic t owns permuted positions [t*n/T, (t+1)*n/T).
  auto from_topic = [&](std::size_t t) {
    const std::size_t lo = t * p.n_items / p.n_topics;
    const std::size_t hi = (t + 1) * p.n_items / p.n_topics;
    return rank_to_item[lo + rng.uniform_below(hi - lo)];
  };
  std::vector<std::size_t> home;
  if (p.n_topics > 0) {
    home.resize(p.n_users);
    for (auto& h : home) h = draw_rank();
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(p.n_records);
  if (2.0 * static_cast<double>(p.n_records) > capacity) {
    // Near-dense request: sample cells directly.
    for (std::size_t cell : rng.sample_indices(
             static_cast<std::size_t>(capacity), p.n_records)) {
      pairs.emplace_back(cell / p.n_items, cell % p.n_items);
    }
  } else {
    std::unordered_set<std::uint64_t> used;
    auto draw_item = [&](std::size_t user, int attempt) -> std::size_t {
      if (p.n_topics == 0) return rank_to_item[draw_rank()];
      // A user who exhausted their topics falls back to uniform items.
      if (attempt >= 64) return rng.uniform_below(p.n_items);
      const bool at_home = rng.uniform01() < p.topic_affinity;
      return from_topic(at_home ? home[user] : draw_rank());
    };
    auto add = [&](std::size_t user) {
      for (int attempt = 0;; ++attempt) {
        std::size_t item = draw_item(user, attempt);
        if (used.insert(static_cast<std::uint64_t>(user) * p.n_items + item).second) {
          pairs.emplace_back(user, item);
          return;
        }
      }
    };
    std::size_t guaranteed = std::min(p.n_users, p.n_records);
    for (std::size_t u = 0; u < guaranteed; ++u) add(u);
    while (pairs.size() < p.n_records) add(rng.uniform_below(p.n_users));
  }

  rng.shuffle(pairs);
  std::vector<RatingRecord> out;
  out.reserve(pairs.size());
  for (const auto& [u, i] : pairs) {
    int level;
    if (p.top_rating_share < 0.0 || p.rating_levels == 1) {
      level = 1 + static_cast<int>(rng.uniform_below(p.rating_levels));
    } else if (rng.uniform01() < p.top_rating_share) {
      level = p.rating_levels;
    } else {
      level = 1 + static_cast<int>(rng.uniform_below(p.rating_levels - 1));
    }
    out.push_back({padded('u', u, p.n_users), padded('i', i, p.n_items),
                   static_cast<double>(level) / p.rating_levels,
                   static_cast<Seq>(out.size())});
  }
  return out;
}

}  // namespace stopaudit
