#include "dbar/multi_index.hpp"

#include <gtest/gtest.h>

#include <atomic>

using namespace dbar;

TEST(Ipow, HandlesNegativeAndComplexExponents) {
  EXPECT_DOUBLE_EQ(ipow(2.0, 10), 1024.0);
  EXPECT_DOUBLE_EQ(ipow(2.0, -2), 0.25);
  EXPECT_DOUBLE_EQ(ipow(5.0, 0), 1.0);
  cdouble r = ipow(cdouble(0.0, 1.0), 3);
  EXPECT_NEAR(std::abs(r - cdouble(0.0, -1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(ipow(cdouble(1.0, 1.0), -2) - cdouble(0.0, -0.5)), 0.0, 1e-15);
}

TEST(ParallelFor, EachIndexExactlyOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsWorkerErrors) {
  EXPECT_THROW(parallel_for(50, [](std::size_t i) {
                 if (i == 17) fail(Errc::SamplerError, "boom");
               }),
               Error);
}

TEST(MultiIndex, ParsesOneBasedKeys) {
  MultiIndex J = MultiIndex::parse("1,3");
  ASSERT_EQ(J.size(), 2u);
  EXPECT_EQ(J[0], 0);
  EXPECT_EQ(J[1], 2);
  EXPECT_EQ(J.to_string(), "1,3");
  EXPECT_TRUE(MultiIndex::parse("").empty());
}

TEST(MultiIndex, RejectsBadInput) {
  EXPECT_THROW(MultiIndex({2, 1}), Error);
  EXPECT_THROW(MultiIndex({1, 1}), Error);
  try {
    MultiIndex::parse("1,x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
  }
}

TEST(MultiIndex, WithAndWithout) {
  MultiIndex J{0, 2};
  EXPECT_EQ(J.with(1), (MultiIndex{0, 1, 2}));
  EXPECT_EQ(J.without(0), (MultiIndex{2}));
  try {
    J.with(2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateIndex);
  }
}

TEST(SignPerm, DocumentedValues) {
  EXPECT_EQ(sign_perm(0, MultiIndex{1, 2}), 1);
  EXPECT_EQ(sign_perm(1, MultiIndex{0, 2}), -1);
  EXPECT_EQ(sign_perm(2, MultiIndex{0, 1}), 1);
  try {
    sign_perm(1, MultiIndex{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateIndex);
  }
}

TEST(SignPerm, AgreesWithTupleSign) {
  for (int n = 1; n <= 6; ++n)
    for (int q = 0; q < n; ++q)
      for (const auto& K : all_multi_indices(n, q))
        for (int j = 0; j < n; ++j) {
          if (K.contains(j)) continue;
          std::vector<int> t{j};
          t.insert(t.end(), K.begin(), K.end());
          EXPECT_EQ(sign_perm(j, K), tuple_sign(t));
        }
}

TEST(BetaSum, DocumentedValues) {
  EXPECT_EQ(beta_sum(MultiIndex{0, 1}, {3, 2}), 5);
  EXPECT_EQ(beta_sum(MultiIndex{0, 2}, {2, 2, 2}), 4);
  EXPECT_EQ(beta_sum(MultiIndex{0, 1, 3}, {1, 1, 1, 1}), 3);
}

TEST(AllMultiIndices, BinomialCountsAndOrder) {
  auto binom = [](int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  for (int n = 1; n <= 6; ++n)
    for (int q = 0; q <= n; ++q) {
      auto all = all_multi_indices(n, q);
      EXPECT_EQ(static_cast<long>(all.size()), binom(n, q));
      for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LT(all[i - 1], all[i]);
    }
}
