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

#ifndef STOPAUDIT_LEDGER_H_
#define STOPAUDIT_LEDGER_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stopaudit/types.h"

namespace stopaudit {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);
std::string to_hex(std::span<const std::uint8_t> data);
Digest digest_from_hex(std::string_view hex);

enum class EntryKind : std::uint8_t {
  kPurchase = 0,
  kDisclosure = 1,
  kStopRequest = 2,
  kClusterSnapshot = 3,
  kCommunityState = 4,
};

std::string to_string(EntryKind kind);
EntryKind parse_entry_kind(std::string_view name);

// Cleartext of one ledger transaction, mirroring the purchase-record
// contract (buyer, itemID, rate, transactionTime) plus a kind and payload.
struct TransactionEntry {
  UserId buyer;
  ItemId item_id;
  double rate = 0.0;  // (0,1] for purchases, 0 otherwise
  Seq transaction_time = 0;
  EntryKind kind = EntryKind::kPurchase;
  std::string payload;  // canonical bytes, see encode_item_list

  bool operator==(const TransactionEntry&) const = default;
};

// Canonical layout, all integers big-endian:
//   kind u8 | len u32 | buyer | len u32 | itemID | rate u64 (x * 2^16)
//   | seq u64 | len u32 | payload
Bytes canonical_bytes(const TransactionEntry& entry);
// Inverse of canonical_bytes; nullopt on any malformed input.
std::optional<TransactionEntry> decode_entry(std::span<const std::uint8_t> bytes);

// count u32 | (len u32 | item)*, order preserved.
std::string encode_item_list(const std::vector<ItemId>& items);
std::optional<std::vector<ItemId>> decode_item_list(std::string_view payload);

using Commitment = Digest;

Commitment commit(const TransactionEntry& entry);
bool verify_disclosure(const TransactionEntry& entry, const Commitment& commitment);

struct LedgerBlock {
  std::uint64_t index = 0;
  Digest prev_hash{};
  std::vector<Commitment> commitments;
  Digest block_hash{};

  bool operator==(const LedgerBlock&) const = default;
};

// SHA-256(index u64 | prev_hash | count u32 | commitments).
Digest compute_block_hash(const LedgerBlock& block);

// index u64 | prev_hash | count u32 | commitments | block_hash.
Bytes block_bytes(const LedgerBlock& block);
std::optional<LedgerBlock> decode_block(std::span<const std::uint8_t> bytes);

struct ChainCheck {
  bool valid = true;
  std::optional<std::size_t> first_bad_index;
};

// Recomputes every block hash and link; reports the first failing block.
ChainCheck verify_chain(const std::vector<LedgerBlock>& chain);

// Appends a block committing `entries`. Throws IntegrityError if the
// existing chain does not verify.
void append_block(std::vector<LedgerBlock>& chain,
                  const std::vector<TransactionEntry>& entries);

Digest head_digest(const std::vector<LedgerBlock>& chain);

// Append-only chain of commitments plus the owner-held cleartext store.
// Ledger positions number commitments across all blocks in order.
class Ledger {
 public:
  // Commits the entries in one new block; returns their positions.
  std::vector<std::size_t> append(const std::vector<TransactionEntry>& entries);
  std::size_t append_one(const TransactionEntry& entry) { return append({entry})[0]; }

  // Cleartext at `position`, checked against its on-chain commitment.
  // Throws Error when out of range and IntegrityError on mismatch.
  const TransactionEntry& get_transaction(std::size_t position) const;

  const Commitment& commitment_at(std::size_t position) const;
  std::size_t entry_count() const { return entries_.size(); }
  const std::vector<LedgerBlock>& chain() const { return chain_; }
  const std::vector<TransactionEntry>& entries() const { return entries_; }
  Digest head() const { return head_digest(chain_); }

  // Rebuilds a ledger from exported chain and cleartext entries. Does not
  // verify; callers run verify_chain and get_transaction.
  static Ledger assemble(std::vector<LedgerBlock> chain,
                         std::vector<TransactionEntry> entries);

  // Test hook: mutable access to the cleartext store.
  std::vector<TransactionEntry>& mutable_entries() { return entries_; }
  std::vector<LedgerBlock>& mutable_chain() { return chain_; }

 private:
  void reindex();

  std::vector<LedgerBlock> chain_;
  std::vector<TransactionEntry> entries_;
  std::vector<std::pair<std::size_t, std::size_t>> locator_;  // (block, slot)
};

}  // namespace stopaudit

#endif  // STOPAUDIT_LEDGER_H_
