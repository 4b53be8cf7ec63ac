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

#include "stopaudit/ledger.h"

#include <openssl/sha.h>

#include <cmath>
#include <limits>

namespace stopaudit {
namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_str(Bytes& out, std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) throw Error("field too long");
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

// Bounds-checked big-endian reader.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  bool u8(std::uint8_t& v) {
    if (pos_ + 1 > data_.size()) return false;
    v = data_[pos_++];
    return true;
  }
  bool u32(std::uint32_t& v) {
    if (pos_ + 4 > data_.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return true;
  }
  bool u64(std::uint64_t& v) {
    if (pos_ + 8 > data_.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return true;
  }
  bool str(std::string& s) {
    std::uint32_t n;
    if (!u32(n) || pos_ + n > data_.size()) return false;
    s.assign(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return true;
  }
  bool digest(Digest& d) {
    if (pos_ + d.size() > data_.size()) return false;
    std::copy_n(data_.begin() + pos_, d.size(), d.begin());
    pos_ += d.size();
    return true;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

constexpr double kRateScale = 65536.0;

std::uint64_t rate_fixed(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("rate outside [0, 1]");
  return static_cast<std::uint64_t>(std::llround(rate * kRateScale));
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
  Digest d;
  SHA256(data.data(), data.size(), d.data());
  return d;
}

Digest sha256(std::string_view data) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) throw DataError("digest must be 64 hex characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DataError(std::string("bad hex digit '") + c + "'");
  };
  Digest d;
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return d;
}

std::string to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::kPurchase:
      return "purchase";
    case EntryKind::kDisclosure:
      return "disclosure";
    case EntryKind::kStopRequest:
      return "stop_request";
    case EntryKind::kClusterSnapshot:
      return "cluster_snapshot";
    case EntryKind::kCommunityState:
      return "community_state";
  }
  return "?";
}

EntryKind parse_entry_kind(std::string_view name) {
  for (auto k : {EntryKind::kPurchase, EntryKind::kDisclosure, EntryKind::kStopRequest,
                 EntryKind::kClusterSnapshot, EntryKind::kCommunityState}) {
    if (to_string(k) == name) return k;
  }
  throw DataError("unknown entry kind '" + std::string(name) + "'");
}

Bytes canonical_bytes(const TransactionEntry& e) {
  Bytes out;
  out.reserve(1 + 12 + e.buyer.size() + e.item_id.size() + 16 + e.payload.size());
  out.push_back(static_cast<std::uint8_t>(e.kind));
  put_str(out, e.buyer);
  put_str(out, e.item_id);
  put_u64(out, rate_fixed(e.rate));
  put_u64(out, e.transaction_time);
  put_str(out, e.payload);
  return out;
}

std::optional<TransactionEntry> decode_entry(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  TransactionEntry e;
  std::uint8_t kind;
  std::uint64_t rate;
  if (!r.u8(kind) || kind > static_cast<std::uint8_t>(EntryKind::kCommunityState)) {
    return std::nullopt;
  }
  e.kind = static_cast<EntryKind>(kind);
  if (!r.str(e.buyer) || !r.str(e.item_id) || !r.u64(rate) ||
      !r.u64(e.transaction_time) || !r.str(e.payload) || !r.done()) {
    return std::nullopt;
  }
  if (rate > static_cast<std::uint64_t>(kRateScale)) return std::nullopt;
  e.rate = static_cast<double>(rate) / kRateScale;
  return e;
}

std::string encode_item_list(const std::vector<ItemId>& items) {
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(items.size()));
  for (const auto& item : items) put_str(out, item);
  return std::string(out.begin(), out.end());
}

std::optional<std::vector<ItemId>> decode_item_list(std::string_view payload) {
  Reader r(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()));
  std::uint32_t n;
  if (!r.u32(n)) return std::nullopt;
  std::vector<ItemId> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string s;
    if (!r.str(s)) return std::nullopt;
    out.push_back(std::move(s));
  }
  if (!r.done()) return std::nullopt;
  return out;
}

Commitment commit(const TransactionEntry& entry) {
  return sha256(canonical_bytes(entry));
}

bool verify_disclosure(const TransactionEntry& entry, const Commitment& commitment) {
  return commit(entry) == commitment;
}

namespace {

Bytes block_header_bytes(const LedgerBlock& b) {
  Bytes out;
  put_u64(out, b.index);
  out.insert(out.end(), b.prev_hash.begin(), b.prev_hash.end());
  put_u32(out, static_cast<std::uint32_t>(b.commitments.size()));
  for (const auto& c : b.commitments) out.insert(out.end(), c.begin(), c.end());
  return out;
}

}  // namespace

Digest compute_block_hash(const LedgerBlock& block) {
  return sha256(block_header_bytes(block));
}

Bytes block_bytes(const LedgerBlock& block) {
  Bytes out = block_header_bytes(block);
  out.insert(out.end(), block.block_hash.begin(), block.block_hash.end());
  return out;
}

std::optional<LedgerBlock> decode_block(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  LedgerBlock b;
  std::uint32_t n;
  if (!r.u64(b.index) || !r.digest(b.prev_hash) || !r.u32(n)) return std::nullopt;
  if (n > bytes.size() / 32) return std::nullopt;
  b.commitments.resize(n);
  for (auto& c : b.commitments) {
    if (!r.digest(c)) return std::nullopt;
  }
  if (!r.digest(b.block_hash) || !r.done()) return std::nullopt;
  return b;
}

ChainCheck verify_chain(const std::vector<LedgerBlock>& chain) {
  Digest prev{};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const LedgerBlock& b = chain[i];
    if (b.index != i || b.prev_hash != prev || compute_block_hash(b) != b.block_hash) {
      return {false, i};
    }
    prev = b.block_hash;
  }
  return {};
}

void append_block(std::vector<LedgerBlock>& chain,
                  const std::vector<TransactionEntry>& entries) {
  if (!verify_chain(chain).valid) throw IntegrityError("cannot append to an invalid chain");
  LedgerBlock b;
  b.index = chain.size();
  if (!chain.empty()) b.prev_hash = chain.back().block_hash;
  for (const auto& e : entries) b.commitments.push_back(commit(e));
  b.block_hash = compute_block_hash(b);
  chain.push_back(std::move(b));
}

Digest head_digest(const std::vector<LedgerBlock>& chain) {
  return chain.empty() ? Digest{} : chain.back().block_hash;
}

std::vector<std::size_t> Ledger::append(const std::vector<TransactionEntry>& entries) {
  LedgerBlock b;
  b.index = chain_.size();
  if (!chain_.empty()) b.prev_hash = chain_.back().block_hash;
  std::vector<std::size_t> positions;
  for (const auto& e : entries) {
    b.commitments.push_back(commit(e));
    positions.push_back(entries_.size());
    locator_.emplace_back(chain_.size(), b.commitments.size() - 1);
    entries_.push_back(e);
  }
  b.block_hash = compute_block_hash(b);
  chain_.push_back(std::move(b));
  return positions;
}

const Commitment& Ledger::commitment_at(std::size_t position) const {
  if (position >= locator_.size()) {
    throw Error("ledger position " + std::to_string(position) + " out of range");
  }
  const auto [block, slot] = locator_[position];
  if (block >= chain_.size() || slot >= chain_[block].commitments.size()) {
    throw IntegrityError("ledger position " + std::to_string(position) +
                         " has no commitment");
  }
  return chain_[block].commitments[slot];
}

const TransactionEntry& Ledger::get_transaction(std::size_t position) const {
  if (position >= entries_.size()) {
    throw Error("ledger position " + std::to_string(position) + " out of range");
  }
  if (position >= locator_.size()) {
    throw IntegrityError("entry " + std::to_string(position) + " has no commitment");
  }
  const TransactionEntry& e = entries_[position];
  if (!verify_disclosure(e, commitment_at(position))) {
    throw IntegrityError("entry " + std::to_string(position) +
                         " does not match its commitment");
  }
  return e;
}

void Ledger::reindex() {
  locator_.clear();
  for (std::size_t b = 0; b < chain_.size(); ++b) {
    for (std::size_t s = 0; s < chain_[b].commitments.size(); ++s) {
      locator_.emplace_back(b, s);
    }
  }
}

Ledger Ledger::assemble(std::vector<LedgerBlock> chain,
                        std::vector<TransactionEntry> entries) {
  Ledger l;
  l.chain_ = std::move(chain);
  l.entries_ = std::move(entries);
  l.reindex();
  return l;
}

}  // namespace stopaudit
