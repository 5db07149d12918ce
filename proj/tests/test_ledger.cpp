#include <gtest/gtest.h>

#include "z2index/ledger.hpp"

using namespace z2index;

TEST(Ledger, ThreeDVirtualDimensionVanishes) {
  for (long long k = 0; k <= 100; ++k) {
    for (long long a : {-3LL, 0LL, 7LL}) {
      const auto r = virtual_dimension_ledger({a, 0, k, 0}, LedgerMode::ThreeD);
      EXPECT_EQ(r.index_T_circ_B, -k);
      EXPECT_EQ(r.virtual_dim, 0);
    }
  }
}

TEST(Ledger, FourDTorusLikeInput) {
  const auto r = virtual_dimension_ledger({0, 2, 0, -1}, LedgerMode::FourD);
  EXPECT_EQ(r.index_T_circ_B, 0);
  EXPECT_EQ(r.virtual_dim, 0);
}

TEST(Ledger, FourDNegativeAhat) {
  const auto r = virtual_dimension_ledger({-2, 0, 1, 0}, LedgerMode::FourD);
  EXPECT_EQ(r.index_T_circ_B, -1);
  EXPECT_EQ(r.virtual_dim, -2);
}

// With index(T|Exp-) = -dim ker(D_Sigma)/2 the chain collapses to
// index(T o B) = Ahat + k and virtual_dim = Ahat.
TEST(Ledger, FourDCollapsesToAhat) {
  for (long long a = -4; a <= 4; ++a)
    for (long long ks = 0; ks <= 6; ks += 2)
      for (long long k = 0; k <= 5; ++k) {
        const auto r = virtual_dimension_ledger({a, ks, k, -ks / 2}, LedgerMode::FourD);
        EXPECT_EQ(r.index_T_circ_B, a + k);
        EXPECT_EQ(r.virtual_dim, a);
      }
}

TEST(Ledger, FourDIsAffineInIndexT) {
  const auto base = virtual_dimension_ledger({1, 2, 3, 0}, LedgerMode::FourD);
  for (long long t = -5; t <= 5; ++t) {
    const auto r = virtual_dimension_ledger({1, 2, 3, t}, LedgerMode::FourD);
    EXPECT_EQ(r.virtual_dim - base.virtual_dim, t);
  }
}

TEST(Ledger, ChainEndsWithResult) {
  const auto r = virtual_dimension_ledger({-2, 0, 1, 0}, LedgerMode::FourD);
  ASSERT_FALSE(r.chain.empty());
  EXPECT_NE(r.chain.back().find("= -2"), std::string::npos);
  const auto r3 = virtual_dimension_ledger({0, 0, 4, 0}, LedgerMode::ThreeD);
  EXPECT_NE(r3.chain.back().find("= 0"), std::string::npos);
}

TEST(Ledger, Errors) {
  EXPECT_THROW(virtual_dimension_ledger({0, 3, 0, 0}, LedgerMode::FourD), DomainError);
  EXPECT_THROW(virtual_dimension_ledger({0, 0, -1, 0}, LedgerMode::ThreeD), DomainError);
  EXPECT_THROW(virtual_dimension_ledger({0, -2, 0, 0}, LedgerMode::FourD), DomainError);
}
