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

#ifndef STOPAUDIT_INGEST_H_
#define STOPAUDIT_INGEST_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stopaudit/types.h"

namespace stopaudit {

enum class RecordFormat { kJsonl, kCsv };

RecordFormat parse_format(std::string_view name);

// Parses purchase records and returns them in replay order: ascending
// timestamp, ties broken by (user, item), seq = 0..n-1. Ratings are divided
// by `raw_max`.
//
// JSON Lines rows use keys user/item/rating/ts. The Amazon review keys
// reviewerID/asin/overall/unixReviewTime are accepted as fallbacks. CSV
// input needs the header `user,item,rating,ts`.
std::vector<RatingRecord> parse_records(std::string_view source,
                                        RecordFormat format,
                                        double raw_max = 1.0);

std::vector<RatingRecord> load_records(const std::string& path,
                                       RecordFormat format,
                                       double raw_max = 1.0);

// Writes records with ts = seq; parse_records(serialize_records(r)) == r.
std::string serialize_records(const std::vector<RatingRecord>& records,
                              RecordFormat format);

// Divides each rating by raw_max. Throws DataError for ratings outside
// (0, raw_max].
std::vector<RatingRecord> normalize_ratings(std::vector<RatingRecord> records,
                                            double raw_max);

// Drops repeated (user, item) purchases, keeping the earliest, and
// renumbers seq.
std::vector<RatingRecord> deduplicate(const std::vector<RatingRecord>& records);

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_records = 0;
  double sparsity = 0.0;
};

DatasetStats sparsity_stats(const std::vector<RatingRecord>& records);

// Same, but against declared universe sizes instead of the distinct counts
// seen in `records` (synthetic datasets need not touch every item).
DatasetStats sparsity_stats(const std::vector<RatingRecord>& records,
                            std::size_t n_users, std::size_t n_items);

std::string stats_to_json(const DatasetStats& stats);

struct CommunitySample {
  std::set<UserId> members;
  double fraction = 1.0;
  std::uint64_t seed = 0;
};

// Uniform sample of round(fraction * n_users) distinct users.
CommunitySample sample_community(const std::vector<RatingRecord>& records,
                                 double fraction, std::uint64_t seed);

struct SynthParams {
  std::size_t n_users = 500;
  std::size_t n_items = 5000;
  std::size_t n_records = 2000;
  int rating_levels = 5;
  std::uint64_t seed = 1;
  double zipf_exponent = 1.1;
  // Taste structure. With n_topics > 0 the items are split into that many
  // equal topics, topics (not items) follow the Zipf law, each user has a
  // home topic and draws from it with probability topic_affinity.
  std::size_t n_topics = 0;
  double topic_affinity = 0.9;
  // Probability of the top rating level; the rest is uniform over the
  // lower levels. Negative means uniform over all levels.
  double top_rating_share = -1.0;
};

// Sparse dataset with distinct (user, item) pairs and Zipf-distributed
// popularity. Every user gets at least one record when n_records allows.
std::vector<RatingRecord> synthesize_dataset(const SynthParams& params);

}  // namespace stopaudit

#endif  // STOPAUDIT_INGEST_H_
