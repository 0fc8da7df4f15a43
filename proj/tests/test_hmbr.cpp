#include <gtest/gtest.h>

#include "hrgc/hmbr.hpp"
#include "hrgc/rng.hpp"

using namespace hrgc;

namespace {

struct MbrFixture {
  Code code;
  std::vector<Symbol> message;
  mbr::MessageMatrixM mm;
  std::vector<NodeState> nodes;

  MbrFixture(int q, int m, std::vector<int> alpha, std::optional<std::vector<int>> k, std::uint64_t seed)
      : code(profile_new(Mode::Mbr, q, m, alpha, k, 1)) {
    Rng rng(seed);
    message.resize(static_cast<std::size_t>(code.profile().B));
    for (auto& s : message) s = static_cast<Symbol>(rng.below(code.field().order()));
    mm = mbr::arrange_m(code.profile(), message);
    nodes = mbr::encode_mbr(code, mm);
  }

  std::vector<int> live_except(int z) const {
    std::vector<int> ids;
    for (int g = 0; g < code.nodes(); ++g)
      if (g != z) ids.push_back(g);
    return ids;
  }

  std::vector<HelpSymbolBatch> repair_batches(int z, OpMode mode) const {
    std::vector<HelpSymbolBatch> out;
    for (auto e : staged_request_plan(code.profile(), RequestKind::Repair, mode, live_except(z)))
      out.push_back(helper_response(code, nodes[static_cast<std::size_t>(e.helper)], e.level, z));
    return out;
  }

  std::vector<HelpSymbolBatch> reconstruct_batches(OpMode mode) const {
    std::vector<HelpSymbolBatch> out;
    for (auto e : staged_request_plan(code.profile(), RequestKind::Reconstruct, mode, live_except(-1)))
      out.push_back(reconstruct_response(code, nodes[static_cast<std::size_t>(e.helper)], e.level));
    return out;
  }

  std::vector<Symbol> expected_row(int g, int l, int t) const {
    auto mu = code.mu(g, l);
    Matrix r = linalg::mul(code.field(), Matrix(1, mu.size(), mu), mm.m[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]);
    return {r.data().begin(), r.data().end()};
  }
};

void corrupt_helpers(const Field& f, std::vector<HelpSymbolBatch>& bs, const std::set<int>& bad, Rng& rng) {
  for (auto& b : bs) {
    if (!bad.count(b.helper)) continue;
    for (auto& layer : b.layers)
      for (auto& s : layer) s = f.add(s, static_cast<Symbol>(1 + rng.below(f.order() - 1)));
  }
}

MbrFixture q3(std::uint64_t seed) { return MbrFixture(3, 8, {3, 2, 1}, std::vector<int>{2, 2, 1}, seed); }

}  // namespace

TEST(ArrangeM, LayoutAndRoundTrip) {
  auto fx = q3(1);
  const auto& p = fx.code.profile();
  EXPECT_EQ(mbr::flatten_m(p, fx.mm), fx.message);
  // Layer 0: alpha 3, k 2 gives 3 S symbols then 2 T symbols per block, and the
  // trailing (alpha-k) x (alpha-k) corner is zero.
  const Matrix& m0 = fx.mm.m[0][0];
  EXPECT_TRUE(linalg::is_symmetric(m0));
  EXPECT_EQ(m0(0, 0), fx.message[0]);
  EXPECT_EQ(m0(0, 1), fx.message[1]);
  EXPECT_EQ(m0(1, 1), fx.message[2]);
  EXPECT_EQ(m0(0, 2), fx.message[3]);
  EXPECT_EQ(m0(2, 1), fx.message[4]);
  EXPECT_EQ(m0(2, 2), 0);
  EXPECT_EQ(fx.mm.m[0][1](0, 0), fx.message[5]);
  auto bad = fx.message;
  bad.push_back(0);
  EXPECT_THROW(mbr::arrange_m(p, bad), Error);
}

TEST(EncodeMbr, TransformedRowsAreMuTimesM) {
  for (auto fx : {q3(2), MbrFixture(4, 37, {6, 5, 4, 3}, std::nullopt, 2)}) {
    const auto& p = fx.code.profile();
    for (int g = 0; g < p.nodes(); ++g) {
      Matrix yt = transformed_rows(fx.code, fx.nodes[static_cast<std::size_t>(g)]);
      for (int l = 0; l < p.q; ++l) {
        const int a = p.alpha_at(l);
        for (int t = 0; t < p.blocks(l); ++t) {
          auto row = yt.row(static_cast<std::size_t>(l)).subspan(static_cast<std::size_t>(t * a), static_cast<std::size_t>(a));
          ASSERT_EQ(std::vector<Symbol>(row.begin(), row.end()), fx.expected_row(g, l, t));
        }
      }
    }
  }
}

TEST(StagedPlan, MbrNonMonotoneKUsesSuffixMaximum) {
  auto p = profile_new(Mode::Mbr, 4, 37, {6, 5, 4, 3}, std::vector<int>{2, 5, 4, 3}, 1);
  std::vector<int> live;
  for (int g = 0; g < 16; ++g) live.push_back(g);
  auto plan = staged_request_plan(p, RequestKind::Reconstruct, OpMode::Plain, live);
  ASSERT_EQ(plan.size(), 5u);
  EXPECT_EQ(plan[0], (PlanEntry{0, 3}));
  EXPECT_EQ(plan[2], (PlanEntry{2, 3}));
  EXPECT_EQ(plan[3], (PlanEntry{3, 2}));
  EXPECT_EQ(plan[4], (PlanEntry{4, 1}));
  auto rp = staged_request_plan(p, RequestKind::Repair, OpMode::Plain, std::vector<int>(live.begin() + 1, live.end()));
  ASSERT_EQ(rp.size(), 6u);
  EXPECT_EQ(rp.back(), (PlanEntry{6, 0}));
}

TEST(RegenerateMbr, PlainRestoresEveryNode) {
  auto fx = q3(3);
  for (int z = 0; z < 9; ++z) {
    auto rep = mbr::regenerate_mbr_plain(fx.code, z, fx.repair_batches(z, OpMode::Plain));
    ASSERT_EQ(rep.outcome, Outcome::Success);
    EXPECT_EQ(*rep.regenerated, fx.nodes[static_cast<std::size_t>(z)].y);
  }
  MbrFixture f4(4, 37, {6, 5, 4, 3}, std::nullopt, 3);
  for (int z : {0, 9}) {
    auto rep = mbr::regenerate_mbr_plain(f4.code, z, f4.repair_batches(z, OpMode::Plain));
    ASSERT_EQ(rep.outcome, Outcome::Success);
    EXPECT_EQ(*rep.regenerated, f4.nodes[static_cast<std::size_t>(z)].y);
  }
}

TEST(RegenerateMbr, PlainModeAcceptsBogusSymbol) {
  auto fx = q3(4);
  auto bs = fx.repair_batches(2, OpMode::Plain);
  bs[1].layers[0][0] = fx.code.field().add(bs[1].layers[0][0], 3);
  auto rep = mbr::regenerate_mbr_plain(fx.code, 2, bs);
  EXPECT_EQ(rep.outcome, Outcome::Success);
  EXPECT_NE(*rep.regenerated, fx.nodes[2].y);
}

TEST(RegenerateMbr, DetectAlarm) {
  auto fx = q3(5);
  Rng rng(1);
  auto ok = mbr::regenerate_mbr_detect(fx.code, 8, fx.repair_batches(8, OpMode::Detect));
  ASSERT_EQ(ok.outcome, Outcome::Success);
  EXPECT_EQ(*ok.regenerated, fx.nodes[8].y);
  auto bs = fx.repair_batches(8, OpMode::Detect);
  corrupt_helpers(fx.code.field(), bs, {1}, rng);
  auto rep = mbr::regenerate_mbr_detect(fx.code, 8, bs);
  EXPECT_EQ(rep.outcome, Outcome::DetectionAlarm);
  EXPECT_FALSE(rep.regenerated.has_value());
}

TEST(RegenerateMbr, RecoverUpToThreeCorruptHelpers) {
  auto fx = q3(6);
  Rng rng(2);
  for (std::set<int> bad : {std::set<int>{3}, std::set<int>{1, 6}, std::set<int>{0, 4, 7}}) {
    auto bs = fx.repair_batches(5, OpMode::Recover);
    corrupt_helpers(fx.code.field(), bs, bad, rng);
    auto rep = mbr::regenerate_mbr_recover(fx.code, 5, bs);
    ASSERT_EQ(rep.outcome, Outcome::Success) << rep.detail;
    EXPECT_EQ(*rep.regenerated, fx.nodes[5].y);
    EXPECT_EQ(std::set<int>(rep.corrupted_nodes.begin(), rep.corrupted_nodes.end()), bad);
  }
  auto bs = fx.repair_batches(5, OpMode::Recover);
  corrupt_helpers(fx.code.field(), bs, {0, 1, 2, 3}, rng);
  auto rep = mbr::regenerate_mbr_recover(fx.code, 5, bs);
  EXPECT_EQ(rep.outcome, Outcome::DecodeFailure);
  EXPECT_FALSE(rep.regenerated.has_value());
}

TEST(RegenerateMbr, NeverSilentlyWrong) {
  auto fx = q3(7);
  Rng rng(3);
  for (int trial = 0; trial < 80; ++trial) {
    const int z = static_cast<int>(rng.below(9));
    std::set<int> bad;
    const int count = 1 + static_cast<int>(rng.below(5));
    while (static_cast<int>(bad.size()) < count) {
      const int g = static_cast<int>(rng.below(9));
      if (g != z) bad.insert(g);
    }
    auto bs = fx.repair_batches(z, OpMode::Recover);
    for (auto& b : bs) {
      if (!bad.count(b.helper)) continue;
      for (auto& layer : b.layers)
        for (auto& s : layer)
          if (rng.below(3) == 0) s = fx.code.field().add(s, static_cast<Symbol>(1 + rng.below(8)));
    }
    auto rep = mbr::regenerate_mbr_recover(fx.code, z, bs);
    if (rep.outcome == Outcome::Success) {
      ASSERT_EQ(*rep.regenerated, fx.nodes[static_cast<std::size_t>(z)].y);
    }
  }
}

TEST(ExtractM, RecoversBlockFromAnyKRows) {
  auto fx = q3(8);
  for (int l = 0; l < 3; ++l) {
    const auto k = static_cast<std::size_t>(fx.code.profile().k_at(l));
    const int a = fx.code.profile().alpha_at(l);
    for (std::vector<int> ids : {std::vector<int>{0, 1}, std::vector<int>{3, 8}, std::vector<int>{7, 2}}) {
      ids.resize(k);
      for (int t = 0; t < fx.code.profile().blocks(l); ++t) {
        Matrix r(k, static_cast<std::size_t>(a));
        for (std::size_t i = 0; i < k; ++i) {
          auto row = fx.expected_row(ids[i], l, t);
          for (int c = 0; c < a; ++c) r(i, static_cast<std::size_t>(c)) = row[static_cast<std::size_t>(c)];
        }
        EXPECT_EQ(mbr::extract_m(fx.code, r, ids, l), fx.mm.m[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]);
      }
    }
  }
  EXPECT_THROW(mbr::extract_m(fx.code, Matrix(3, 3), {0, 1, 2}, 0), Error);
}

TEST(RecM, CleanErasedAndCorrupted) {
  auto fx = q3(9);
  const Field& f = fx.code.field();
  for (int l = 0; l < 3; ++l) {
    std::vector<std::optional<std::vector<Symbol>>> rows;
    for (int g = 0; g < 9; ++g) rows.emplace_back(fx.expected_row(g, l, 0));
    auto clean = mbr::rec_m(fx.code, rows, l);
    ASSERT_TRUE(std::holds_alternative<mbr::RecMResult>(clean));
    EXPECT_EQ(std::get<mbr::RecMResult>(clean).m, fx.mm.m[static_cast<std::size_t>(l)][0]);
    rows[0] = std::nullopt;
    (*rows[4]).back() = f.add((*rows[4]).back(), 1);
    (*rows[7])[0] = f.add((*rows[7])[0], 5);
    auto mixed = mbr::rec_m(fx.code, rows, l);
    ASSERT_TRUE(std::holds_alternative<mbr::RecMResult>(mixed)) << l;
    EXPECT_EQ(std::get<mbr::RecMResult>(mixed).m, fx.mm.m[static_cast<std::size_t>(l)][0]);
    EXPECT_EQ(std::get<mbr::RecMResult>(mixed).corrupted, (std::vector<int>{4, 7}));
  }
}

TEST(ReconstructMbr, PlainDetectRecover) {
  auto fx = q3(10);
  Rng rng(4);
  auto plain = mbr::reconstruct_mbr_plain(fx.code, fx.reconstruct_batches(OpMode::Plain));
  ASSERT_EQ(plain.outcome, Outcome::Success);
  EXPECT_EQ(*plain.message, fx.message);
  auto det = mbr::reconstruct_mbr_detect(fx.code, fx.reconstruct_batches(OpMode::Detect));
  ASSERT_EQ(det.outcome, Outcome::Success);
  EXPECT_EQ(*det.message, fx.message);
  auto bad = fx.reconstruct_batches(OpMode::Detect);
  corrupt_helpers(fx.code.field(), bad, {1}, rng);
  EXPECT_EQ(mbr::reconstruct_mbr_detect(fx.code, bad).outcome, Outcome::DetectionAlarm);
  for (std::set<int> corrupt : {std::set<int>{}, std::set<int>{2, 5}, std::set<int>{0, 3, 6, 8}}) {
    auto bs = fx.reconstruct_batches(OpMode::Recover);
    corrupt_helpers(fx.code.field(), bs, corrupt, rng);
    auto rep = mbr::reconstruct_mbr_recover(fx.code, bs);
    ASSERT_EQ(rep.outcome, Outcome::Success) << rep.detail;
    EXPECT_EQ(*rep.message, fx.message);
    EXPECT_EQ(std::set<int>(rep.corrupted_nodes.begin(), rep.corrupted_nodes.end()), corrupt);
  }
}

TEST(ReconstructMbr, ModeMismatchRejected) {
  auto fx = q3(11);
  Code msr_code(profile_new(Mode::Msr, 3, 8, {3, 2, 1}, std::nullopt, 1));
  EXPECT_THROW(mbr::reconstruct_mbr_plain(msr_code, {}), Error);
  EXPECT_THROW(mbr::arrange_m(msr_code.profile(), fx.message), Error);
}
