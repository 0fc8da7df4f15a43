#include <gtest/gtest.h>

#include <numeric>

#include "hrgc/capability.hpp"
#include "hrgc/hermitian.hpp"
#include "hrgc/rng.hpp"

using namespace hrgc;
using namespace hrgc::capability;

namespace {

long long choose(int n, int r) {
  long long c = 1;
  for (int i = 0; i < r; ++i) c = c * (n - i) / (i + 1);
  return c;
}

}  // namespace

TEST(Tradeoff, OperatingPointsMeetTheCutSetBound) {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(30));
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    const Rational b(1 + static_cast<long long>(rng.below(1000)));
    auto msr = msr_point(b, k, d);
    EXPECT_EQ(cutset_bound(k, d, msr.alpha, msr.gamma / d), b) << k << ' ' << d;
    auto mbr = mbr_point(b, k, d);
    EXPECT_EQ(mbr.alpha, mbr.gamma);
    EXPECT_EQ(cutset_bound(k, d, mbr.alpha, mbr.gamma / d), b) << k << ' ' << d;
    EXPECT_LE(msr.alpha, mbr.alpha);
    EXPECT_GE(msr.gamma, mbr.gamma);
  }
  EXPECT_THROW(cutset_bound(3, 2, 1, 1), Error);
  EXPECT_THROW(msr_point(1, 0, 2), Error);
}

TEST(Tradeoff, EveryLayerSitsOnItsOperatingPoint) {
  auto ms = profile_draft(Mode::Msr, 4, 37, {6, 5, 4, 3}, std::nullopt, 1);
  auto mb = profile_draft(Mode::Mbr, 4, 37, {6, 5, 4, 3}, std::vector<int>{6, 5, 4, 3}, 1);
  auto mb2 = profile_draft(Mode::Mbr, 3, 8, {3, 2, 1}, std::vector<int>{2, 2, 1}, 1);
  for (const auto& p : {ms, mb, mb2}) {
    Rational total = 0;
    for (const auto& li : layer_identities(p)) {
      EXPECT_TRUE(li.point_ok) << li.layer;
      EXPECT_TRUE(li.cutset_ok) << li.layer;
      total += li.payload;
    }
    EXPECT_EQ(total, Rational(p.B));
  }
  auto ids = layer_identities(ms);
  EXPECT_EQ(ids[0].beta, Rational(10));
  EXPECT_EQ(ids[0].bandwidth, Rational(120));
  EXPECT_EQ(ids[3].bandwidth, Rational(120));
}

TEST(Tau, Q4Example) {
  auto lp = msr_params(4, {6, 5, 4, 3});
  EXPECT_EQ(tau_h_regen(lp), 4 * ((16 - 6 - 1) / 2));
  EXPECT_EQ(tau_rs_regen(lp), (60 - 36) / 2);
  EXPECT_EQ(tau_h_recon(lp), 4 * ((16 - 4) / 2));
  EXPECT_EQ(tau_rs_recon(lp), (64 - 22) / 2);
  auto p = profile_draft(Mode::Msr, 4, 37, {6, 5, 4, 3}, std::nullopt, 1);
  EXPECT_EQ(tau_hmsr_regen(p), 16);
  EXPECT_EQ(tau_rsmsr(p), 12);
  EXPECT_EQ(tau_hmsr_recon(p), 24);
}

TEST(Tau, RejectsInconsistentParameters) {
  LayerParams lp{3, {3, 2, 1}, {6, 4}, {4, 3, 2}};
  EXPECT_THROW(tau_h_regen(lp), Error);
  EXPECT_THROW(tau_h_regen(msr_params(3, {9, 8, 7})), Error);
}

// Over every MSR layer choice the layered code corrects at least the
// guaranteed margin more than a same-rate RS code.
TEST(Tau, GapAtLeastGuaranteedForAllAlphas) {
  for (int q : {4, 5, 6, 7}) {
    for (const auto& a : all_msr_alphas(q)) {
      auto lp = msr_params(q, a);
      EXPECT_GE(Rational(tau_h_regen(lp) - tau_rs_regen(lp)), guaranteed_gap(q)) << q;
    }
  }
  EXPECT_EQ(guaranteed_gap(4), Rational(1));
  EXPECT_EQ(guaranteed_gap(5), Rational(5, 2));
}

TEST(Sweep, AlphaCountsMatchBinomial) {
  for (int q : {2, 3, 4, 5, 6}) {
    auto all = all_msr_alphas(q);
    EXPECT_EQ(static_cast<long long>(all.size()), choose((q * q - 2) / 2, q)) << q;
    for (const auto& a : all) {
      EXPECT_TRUE(std::is_sorted(a.rbegin(), a.rend()));
      EXPECT_LE(2 * a.front(), q * q - 2);
      EXPECT_GE(a.back(), 1);
    }
  }
  EXPECT_EQ(all_msr_alphas(3).size(), 1u);
  EXPECT_EQ(all_msr_alphas(4).size(), 35u);
  EXPECT_EQ(all_msr_alphas(5).size(), 462u);
}

TEST(Sweep, RuleProducesValidProfiles) {
  for (int q = 4; q <= 16; ++q) {
    const int m = sweep_m(q);
    auto a = sweep_alpha(q);
    ASSERT_EQ(static_cast<int>(a.size()), q);
    for (int j = 0; j < q; ++j) {
      EXPECT_EQ(kappa_closed(q, m, j), kappa(q, m, j)) << q << ' ' << j;
      EXPECT_EQ(kappa(q, m, j), 2 * q - 2 - j);
      EXPECT_LE(a[static_cast<std::size_t>(j)], kappa(q, m, j));
      if (j) {
        EXPECT_LT(a[static_cast<std::size_t>(j)], a[static_cast<std::size_t>(j - 1)]);
      }
    }
    EXPECT_LE(2 * a.front(), q * q - 2);
  }
  // For q = 16 the column count lcm(alpha) exceeds what a node can hold, so
  // that row exists only on paper.
  for (int q : {4, 5, 8}) EXPECT_NO_THROW(profile_draft(Mode::Msr, q, sweep_m(q), sweep_alpha(q), std::nullopt, 1));
  try {
    profile_draft(Mode::Msr, 16, sweep_m(16), sweep_alpha(16), std::nullopt, 1);
    ADD_FAILURE() << "q = 16 sweep profile should exceed the column cap";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidAlpha);
  }
}

TEST(Sweep, FrozenRowsEvenQ) {
  const std::vector<std::tuple<int, int, int>> expect{{4, 16, 12},     {6, 72, 60},     {8, 192, 168},  {10, 400, 360},
                                                      {12, 720, 660}, {14, 1176, 1092}, {16, 1792, 1680}};
  auto rows = capability_sweep(4, 16, 2);
  ASSERT_EQ(rows.size(), expect.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [q, th, tr] = expect[i];
    EXPECT_EQ(rows[i].q, q);
    EXPECT_EQ(rows[i].tau_h, th) << q;
    EXPECT_EQ(rows[i].tau_rs, tr) << q;
    EXPECT_GT(Rational(rows[i].tau_h - rows[i].tau_rs), guaranteed_gap(q));
  }
  EXPECT_EQ(rows[0].alpha, (std::vector<int>{6, 5, 4, 3}));
  EXPECT_EQ(rows[0].regen_rate, Rational(36, 60));
}

TEST(Sweep, CsvLayout) {
  auto csv = sweep_csv(capability_sweep(4, 6, 2));
  EXPECT_EQ(csv,
            "q,alphas,ds,tau_hmsr,tau_rsmsr\n"
            "4,6;5;4;3,12;10;8;6,16,12\n"
            "6,10;9;8;7;6;5,20;18;16;14;12;10,72,60\n");
  EXPECT_THROW(capability_sweep(4, 2, 1), Error);
  EXPECT_THROW(capability_sweep(4, 8, 0), Error);
}
