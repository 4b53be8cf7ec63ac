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
#include <vector>

#include "gtest/gtest.h"
#include "stopaudit/ingest.h"
#include "stopaudit/similarity.h"

namespace stopaudit::mpc {
namespace {

// Field product by schoolbook 128-bit arithmetic, independent of the
// library's Mersenne folding.
std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % kModulus);
}

TEST(FixedPoint, Examples) {
  EXPECT_EQ(encode_fixed(0.0).value(), 0u);
  EXPECT_EQ(encode_fixed(1.0).value(), 65536u);
  EXPECT_EQ(encode_fixed(0.75).value(), 49152u);
  EXPECT_EQ(decode_fixed(encode_fixed(0.75)), 0.75);
  EXPECT_EQ(decode_fixed(encode_fixed(1.0)), 1.0);
}

TEST(FixedPoint, RangeAndPrecision) {
  EXPECT_THROW(encode_fixed(-0.01), Error);
  EXPECT_THROW(encode_fixed(1.01), Error);
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform01();
    EXPECT_LE(std::abs(decode_fixed(encode_fixed(x)) - x), std::ldexp(1.0, -16));
  }
}

TEST(Field, MatchesSchoolbookArithmetic) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const FieldElement a = FieldElement::random(rng), b = FieldElement::random(rng);
    EXPECT_EQ((a * b).value(), mulmod(a.value(), b.value()));
    EXPECT_EQ((a + b).value(), (a.value() + b.value()) % kModulus);
    EXPECT_EQ((a - b + b), a);
  }
  EXPECT_EQ(FieldElement(kModulus).value(), 0u);
  EXPECT_EQ(FieldElement(~std::uint64_t{0}).value(), (~std::uint64_t{0}) % kModulus);
}

TEST(Share, ZeroSumsToZero) {
  Rng rng(1);
  for (std::size_t n = 2; n <= 6; ++n) {
    EXPECT_EQ(reconstruct(share(FieldElement(0), n, rng)).value(), 0u);
  }
}

TEST(Share, RoundTripExact) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const FieldElement s = FieldElement::random(rng);
    EXPECT_EQ(reconstruct(share(s, 2 + i % 4, rng)), s);
  }
}

TEST(Share, FreshRandomness) {
  Rng rng(4);
  const FieldElement s(12345);
  EXPECT_NE(share(s, 3, rng).shares, share(s, 3, rng).shares);
}

TEST(Share, NeedsTwoParties) {
  Rng rng(1);
  EXPECT_THROW(share(FieldElement(1), 1, rng), Error);
}

// Any n-1 shares look uniform: bucket the first share of many sharings of
// one fixed secret and run a chi-squared test at a loose threshold.
TEST(Share, FirstShareLooksUniform) {
  Rng rng(99);
  const int buckets = 16, samples = 32000;
  std::vector<int> hist(buckets, 0);
  for (int i = 0; i < samples; ++i) {
    auto v = share(encode_fixed(0.5), 3, rng);
    ++hist[static_cast<int>(v.shares[0].value() * static_cast<double>(buckets) / kModulus)];
  }
  const double expect = static_cast<double>(samples) / buckets;
  double chi2 = 0;
  for (int h : hist) chi2 += (h - expect) * (h - expect) / expect;
  EXPECT_LT(chi2, 37.7);  // df 15, p = 0.001
}

TEST(Beaver, ProductRoundTripExact) {
  Rng rng(6), dealer(7);
  for (int i = 0; i < 10000; ++i) {
    const FieldElement x = FieldElement::random(rng), y = FieldElement::random(rng);
    const std::size_t n = 2 + i % 3;
    auto z = multiply(share(x, n, rng), share(y, n, rng), deal_triple(n, dealer));
    EXPECT_EQ(reconstruct(z).value(), mulmod(x.value(), y.value()));
  }
}

TEST(Beaver, MismatchedPartiesRejected) {
  Rng rng(1);
  EXPECT_THROW(multiply(share(FieldElement(1), 2, rng), share(FieldElement(1), 3, rng),
                        deal_triple(2, rng)),
               Error);
}

TEST(SecureAggregates, SingleRater) {
  RaterColumn a{{"u", 1.0}}, b{{"u", 1.0}};
  auto agg = secure_pair_aggregates("a", a, "b", b, 3, 1);
  EXPECT_EQ(agg.dot, 1.0);
  EXPECT_EQ(agg.norm_a, 1.0);
  EXPECT_EQ(agg.norm_b, 1.0);
  EXPECT_EQ(agg.common, 1u);
}

TEST(SecureAggregates, EmptyIntersection) {
  RaterColumn a{{"u", 1.0}}, b{{"v", 1.0}};
  auto agg = secure_pair_aggregates("a", a, "b", b, 3, 1);
  EXPECT_EQ(agg.common, 0u);
  EXPECT_EQ(agg.dot, 0.0);
  EXPECT_THROW(secure_pair_aggregates("a", a, "b", b, 1, 1), Error);
}

TEST(SecureAggregates, MatchPlaintext) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    RaterColumn a, b;
    for (int u = 0; u < 30; ++u) {
      const std::string id = "u" + std::to_string(u);
      if (rng.uniform01() < 0.6) a[id] = 0.2 * (1 + rng.uniform_below(5));
      if (rng.uniform01() < 0.6) b[id] = 0.2 * (1 + rng.uniform_below(5));
    }
    const auto s = secure_pair_aggregates("a", a, "b", b, 3, t);
    const auto p = plaintext_aggregates(a, b);
    EXPECT_EQ(s.common, p.common);
    EXPECT_LE(std::abs(s.dot - p.dot), std::ldexp(1.0, -12));
    EXPECT_LE(std::abs(s.norm_a - p.norm_a), std::ldexp(1.0, -12));
    EXPECT_LE(std::abs(s.norm_b - p.norm_b), std::ldexp(1.0, -12));
    EXPECT_LE(s.dot * s.dot, s.norm_a * s.norm_b + 1e-9);
  }
}

TEST(SecureAggregates, IndependentOfCallOrder) {
  RaterColumn a{{"u", 0.4}, {"v", 1.0}}, b{{"u", 0.6}, {"v", 0.8}};
  auto first = secure_pair_aggregates("a", a, "b", b, 3, 9);
  secure_pair_aggregates("x", a, "y", b, 3, 9);
  auto again = secure_pair_aggregates("a", a, "b", b, 3, 9);
  EXPECT_EQ(first.dot, again.dot);
}

TEST(Finalize, Examples) {
  EXPECT_EQ(finalize_similarity({1.0, 1.0, 1.0, 1}), 1.0);
  EXPECT_EQ(finalize_similarity({0.0, 1.0, 1.0, 1}), 0.0);
  EXPECT_EQ(finalize_similarity({0.0, 0.0, 1.0, 1}), 0.0);
  RaterColumn a{{"u1", 0.8}, {"u2", 0.6}}, b{{"u1", 1.0}, {"u2", 0.4}};
  EXPECT_NEAR(finalize_similarity(secure_pair_aggregates("a", a, "b", b, 3, 2)),
              1.04 / std::sqrt(1.16), 1e-4);
}

TEST(MpcBuild, EmptyRecords) {
  EXPECT_TRUE(mpc_build_similarity({}, 3, 1).empty());
}

TEST(MpcBuild, WithinToleranceOfPlaintext) {
  for (std::uint64_t seed : {1, 2, 3}) {
    SynthParams p;
    p.n_users = 60;
    p.n_items = 80;
    p.n_records = 600;
    p.seed = seed;
    const auto recs = synthesize_dataset(p);
    const auto plain = build_similarity(recs);
    const auto shared = mpc_build_similarity(recs, 3, seed);
    EXPECT_LE(shared.max_abs_diff(plain), 1e-4);
    EXPECT_EQ(shared.pair_count(), plain.pair_count());
  }
}

TEST(Backend, Factory) {
  EXPECT_EQ(make_backend("plaintext", 3, 0)->name(), "plaintext");
  EXPECT_EQ(make_backend("shared", 3, 0)->name(), "shared");
  EXPECT_THROW(make_backend("ckks", 3, 0), Error);
  SynthParams p;
  p.n_users = 20;
  p.n_items = 30;
  p.n_records = 120;
  const auto recs = synthesize_dataset(p);
  EXPECT_LE(make_backend("shared", 4, 5)->build(recs).max_abs_diff(build_similarity(recs)), 1e-4);
}

TEST(Capacity, CoversDeskScale) {
  EXPECT_GE(max_common_raters(), std::size_t{1} << 12);
}

}  // namespace
}  // namespace stopaudit::mpc
