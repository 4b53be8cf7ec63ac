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

#ifndef STOPAUDIT_SERIALIZE_H_
#define STOPAUDIT_SERIALIZE_H_

// JSON formats exchanged with the judge.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stopaudit/community.h"
#include "stopaudit/ledger.h"
#include "stopaudit/probing.h"

namespace stopaudit {

using json = nlohmann::json;

json evidence_to_json(const Evidence& e);
Evidence evidence_from_json(const json& j);

// Community state, clusters as {"item", "members": [{"item", "tag"}]}.
json community_to_json(const Community& c);
Community community_from_json(const json& j);

// Exact bytes the community-state commitment covers.
std::string canonical_community_export(const Community& c);
Digest community_digest(std::string_view canonical_export);

// Chain export: array of blocks with hex-encoded hashes.
json chain_to_json(const std::vector<LedgerBlock>& chain);
std::vector<LedgerBlock> chain_from_json(const json& j);

// Entry store: one JSON object per line, keyed by ledger position.
std::string entries_to_jsonl(const std::vector<TransactionEntry>& entries);
std::vector<TransactionEntry> entries_from_jsonl(std::string_view text);

json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace stopaudit

#endif  // STOPAUDIT_SERIALIZE_H_
