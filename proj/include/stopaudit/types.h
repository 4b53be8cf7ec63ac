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

#ifndef STOPAUDIT_TYPES_H_
#define STOPAUDIT_TYPES_H_

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace stopaudit {

using UserId = std::string;
using ItemId = std::string;
using Seq = std::uint64_t;
using ItemSet = std::set<ItemId>;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data. `row` is 1-based, 0 when not tied to a row.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row = 0)
      : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Cleartext does not match its ledger commitment, or the chain is broken.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// One timestamped purchase. `rating` is in (0,1] once normalized.
struct RatingRecord {
  UserId user;
  ItemId item;
  double rating = 0.0;
  Seq seq = 0;

  bool operator==(const RatingRecord&) const = default;
};

// One entry of a user's purchase history as seen by the platform or the
// community.
struct HistoryEntry {
  ItemId item;
  double rating = 0.0;
  Seq seq = 0;

  bool operator==(const HistoryEntry&) const = default;
};

using History = std::vector<HistoryEntry>;

}  // namespace stopaudit

#endif  // STOPAUDIT_TYPES_H_
