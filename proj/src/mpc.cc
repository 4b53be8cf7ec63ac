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

#include "stopaudit/mpc.h"

#include <cmath>

namespace stopaudit::mpc {

std::uint64_t FieldElement::reduce(std::uint64_t v) {
  v = (v & kModulus) + (v >> 61);
  return v >= kModulus ? v - kModulus : v;
}

FieldElement FieldElement::random(Rng& rng) {
  FieldElement f;
  f.value_ = rng.uniform_below(kModulus);
  return f;
}

FieldElement operator+(FieldElement a, FieldElement b) {
  FieldElement r;
  std::uint64_t s = a.value_ + b.value_;  // < 2^62, no overflow
  r.value_ = s >= kModulus ? s - kModulus : s;
  return r;
}

FieldElement operator-(FieldElement a, FieldElement b) {
  FieldElement r;
  r.value_ = a.value_ >= b.value_ ? a.value_ - b.value_
                                  : a.value_ + kModulus - b.value_;
  return r;
}

FieldElement operator*(FieldElement a, FieldElement b) {
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(a.value_) * b.value_;
  const std::uint64_t lo = static_cast<std::uint64_t>(prod) & kModulus;
  const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 61);
  return FieldElement(lo + hi);
}

FieldElement encode_fixed(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error("fixed-point input outside [0, 1]");
  return FieldElement(static_cast<std::uint64_t>(std::llround(x * kScale)));
}

double decode_fixed(FieldElement v) {
  return static_cast<double>(v.value()) / static_cast<double>(kScale);
}

double decode_product(FieldElement v) {
  return static_cast<double>(v.value()) / (static_cast<double>(kScale) * kScale);
}

ShareVector share(FieldElement secret, std::size_t n_parties, Rng& rng) {
  if (n_parties < 2) throw Error("secret sharing needs at least 2 parties");
  ShareVector out;
  out.shares.reserve(n_parties);
  FieldElement sum;
  for (std::size_t i = 0; i + 1 < n_parties; ++i) {
    out.shares.push_back(FieldElement::random(rng));
    sum += out.shares.back();
  }
  out.shares.push_back(secret - sum);
  return out;
}

FieldElement reconstruct(const ShareVector& shares) {
  FieldElement sum;
  for (const auto& s : shares.shares) sum += s;
  return sum;
}

BeaverTriple deal_triple(std::size_t n_parties, Rng& dealer) {
  const FieldElement a = FieldElement::random(dealer);
  const FieldElement b = FieldElement::random(dealer);
  return {share(a, n_parties, dealer), share(b, n_parties, dealer),
          share(a * b, n_parties, dealer)};
}

ShareVector add(const ShareVector& x, const ShareVector& y) {
  if (x.n_parties() != y.n_parties()) throw Error("share vectors differ in size");
  ShareVector out = x;
  for (std::size_t i = 0; i < out.shares.size(); ++i) out.shares[i] += y.shares[i];
  return out;
}

ShareVector multiply(const ShareVector& x, const ShareVector& y,
                     const BeaverTriple& t) {
  const std::size_t n = x.n_parties();
  if (y.n_parties() != n || t.a.n_parties() != n || t.b.n_parties() != n ||
      t.c.n_parties() != n) {
    throw Error("share vectors differ in size");
  }
  // Each party broadcasts x_i - a_i and y_i - b_i; the openings reveal
  // nothing because a and b are uniform.
  FieldElement d, e;
  for (std::size_t i = 0; i < n; ++i) {
    d += x.shares[i] - t.a.shares[i];
    e += y.shares[i] - t.b.shares[i];
  }
  ShareVector z;
  z.shares.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    FieldElement zi = t.c.shares[i] + d * t.b.shares[i] + e * t.a.shares[i];
    if (i == 0) zi += d * e;
    z.shares.push_back(zi);
  }
  return z;
}

std::size_t max_common_raters() {
  return static_cast<std::size_t>((kModulus - 1) / (kScale * kScale));
}

PairAggregates secure_pair_aggregates(const ItemId& a, const RaterColumn& col_a,
                                      const ItemId& b, const RaterColumn& col_b,
                                      std::size_t n_parties, std::uint64_t seed) {
  if (n_parties < 2) throw Error("secret sharing needs at least 2 parties");
  // Who rated what is public; only the values are shared.
  std::vector<std::pair<double, double>> common;
  auto ia = col_a.begin();
  auto ib = col_b.begin();
  while (ia != col_a.end() && ib != col_b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      common.emplace_back(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  if (common.size() > max_common_raters()) {
    throw Error("common-rater count exceeds fixed-point capacity");
  }
  PairAggregates agg;
  agg.common = common.size();
  if (common.empty()) return agg;

  const std::string label = a + '\x1f' + b;
  Rng input_rng(derive_seed(seed, "input:" + label));
  Rng dealer(derive_seed(seed, "dealer:" + label));

  ShareVector zero;
  zero.shares.assign(n_parties, FieldElement());
  ShareVector dot = zero, norm_a = zero, norm_b = zero;
  for (const auto& [ra, rb] : common) {
    const ShareVector sa = share(encode_fixed(ra), n_parties, input_rng);
    const ShareVector sb = share(encode_fixed(rb), n_parties, input_rng);
    dot = add(dot, multiply(sa, sb, deal_triple(n_parties, dealer)));
    norm_a = add(norm_a, multiply(sa, sa, deal_triple(n_parties, dealer)));
    norm_b = add(norm_b, multiply(sb, sb, deal_triple(n_parties, dealer)));
  }
  agg.dot = decode_product(reconstruct(dot));
  agg.norm_a = decode_product(reconstruct(norm_a));
  agg.norm_b = decode_product(reconstruct(norm_b));
  return agg;
}

PairAggregator shared_aggregator(std::size_t n_parties, std::uint64_t seed) {
  if (n_parties < 2) throw Error("secret sharing needs at least 2 parties");
  return [n_parties, seed](const ItemId& a, const RaterColumn& ca,
                           const ItemId& b, const RaterColumn& cb) {
    return secure_pair_aggregates(a, ca, b, cb, n_parties, seed);
  };
}

SimilarityMap mpc_build_similarity(const std::vector<RatingRecord>& records,
                                   std::size_t n_parties, std::uint64_t seed) {
  return build_similarity(ratings_by_item(records),
                          shared_aggregator(n_parties, seed));
}

SharedBackend::SharedBackend(std::size_t n_parties, std::uint64_t seed)
    : n_parties_(n_parties), seed_(seed) {
  if (n_parties < 2) throw Error("secret sharing needs at least 2 parties");
}

std::unique_ptr<SimilarityBackend> make_backend(const std::string& name,
                                                std::size_t n_parties,
                                                std::uint64_t seed) {
  if (name == "plaintext") return std::make_unique<PlaintextBackend>();
  if (name == "shared") return std::make_unique<SharedBackend>(n_parties, seed);
  throw Error("unknown similarity backend '" + name + "'");
}

}  // namespace stopaudit::mpc
