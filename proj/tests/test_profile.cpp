#include <gtest/gtest.h>

#include <set>

#include "hrgc/code.hpp"
#include "hrgc/profile.hpp"

using namespace hrgc;

namespace {

CodeProfile msr3() { return profile_new(Mode::Msr, 3, 8, {3, 2, 1}, std::nullopt, 1); }
CodeProfile msr4() { return profile_new(Mode::Msr, 4, 37, {6, 5, 4, 3}, std::nullopt, 1); }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

// Determinant-based independence check, separate from the rank routine the
// library uses.
bool independent_by_det(const Field& f, const Matrix& psi, const std::vector<int>& rows) {
  return linalg::determinant(f, linalg::select_rows(psi, rows)) != 0;
}

}  // namespace

TEST(ProfileNew, MsrQ4Example) {
  auto p = msr4();
  EXPECT_EQ(p.kappa, (std::vector<int>{10, 9, 7, 6}));
  EXPECT_EQ(p.d, (std::vector<int>{12, 10, 8, 6}));
  EXPECT_EQ(p.k, (std::vector<int>{7, 6, 5, 4}));
  EXPECT_EQ(p.A, 60);
  EXPECT_EQ(p.B, 1320);
}

TEST(ProfileNew, MsrQ3Example) {
  auto p = msr3();
  EXPECT_EQ(p.d, (std::vector<int>{6, 4, 2}));
  EXPECT_EQ(p.A, 6);
  EXPECT_EQ(p.B, 54);
}

TEST(ProfileNew, MbrQ4Example) {
  auto p = profile_new(Mode::Mbr, 4, 37, {6, 5, 4, 3}, std::vector<int>{6, 5, 4, 3}, 1);
  EXPECT_EQ(p.B, 660);
  EXPECT_EQ(p.d, p.alpha);
}

TEST(ProfileNew, PayloadFormulaAgainstDirectSum) {
  for (const auto& p : {msr3(), msr4()}) {
    long long b = 0;
    for (int a : p.alpha) b += p.A * (a + 1);
    EXPECT_EQ(p.B, b);
    for (int a : p.alpha) EXPECT_EQ(p.A % a, 0);
  }
}

TEST(ProfileNew, Validation) {
  EXPECT_EQ(kind_of([] { profile_new(Mode::Msr, 4, 37, {6, 6, 4, 3}, std::nullopt, 1); }), ErrorKind::InvalidAlpha);
  EXPECT_EQ(kind_of([] { profile_new(Mode::Msr, 4, 37, {11, 5, 4, 3}, std::nullopt, 1); }), ErrorKind::InvalidAlpha);
  EXPECT_EQ(kind_of([] { profile_new(Mode::Msr, 4, 37, {6, 5, 4}, std::nullopt, 1); }), ErrorKind::InvalidAlpha);
  EXPECT_EQ(kind_of([] { profile_new(Mode::Msr, 4, 14, {6, 5, 4, 3}, std::nullopt, 1); }), ErrorKind::InvalidM);
  EXPECT_EQ(kind_of([] { profile_new(Mode::Msr, 6, 40, {6, 5, 4, 3, 2, 1}, std::nullopt, 1); }), ErrorKind::UnsupportedQ);
  EXPECT_EQ(kind_of([] { profile_new(Mode::Mbr, 3, 8, {3, 2, 1}, std::vector<int>{4, 2, 1}, 1); }), ErrorKind::InvalidK);
  EXPECT_EQ(kind_of([] { profile_new(Mode::Msr, 3, 8, {3, 2, 1}, std::vector<int>{4, 3, 2}, 1); }), ErrorKind::InvalidK);
  // 2 * alpha_0 = 8 > q^2 - 2 = 7
  EXPECT_EQ(kind_of([] { profile_new(Mode::Msr, 3, 20, {4, 2, 1}, std::nullopt, 1); }), ErrorKind::InvalidAlpha);
}

// With A a multiple of alpha_l, A k (2 alpha - k + 1) / (2 alpha) is always an
// integer since k (2 alpha - k + 1) is even; every admissible k is accepted.
TEST(ProfileNew, MbrPayloadIntegralForEveryK) {
  for (int k0 = 1; k0 <= 3; ++k0)
    for (int k1 = 1; k1 <= 2; ++k1) {
      auto p = profile_draft(Mode::Mbr, 3, 8, {3, 2, 1}, std::vector<int>{k0, k1, 1}, 1);
      long long b = 0;
      for (int l = 0; l < 3; ++l) b += p.blocks(l) * p.block_symbols(l);
      EXPECT_EQ(p.B, b);
    }
}

TEST(ProfileNew, MbrQ3KTwoTwoOne) {
  auto p = profile_new(Mode::Mbr, 3, 8, {3, 2, 1}, std::vector<int>{2, 2, 1}, 1);
  // 6*2*5/6 + 6*2*3/4 + 6*1*2/2 = 10 + 9 + 6
  EXPECT_EQ(p.B, 25);
}

TEST(SelectDelta, DeterministicDistinctPermutation) {
  auto a = msr3(), b = msr3();
  EXPECT_EQ(a.lambda, b.lambda);
  std::set<Symbol> uniq(a.lambda.begin(), a.lambda.end());
  EXPECT_EQ(uniq.size(), 9u);
  auto c = profile_new(Mode::Msr, 3, 8, {3, 2, 1}, std::nullopt, 2);
  std::set<Symbol> uc(c.lambda.begin(), c.lambda.end());
  EXPECT_EQ(uc.size(), 9u);
}

// The hard requirement of the search: every helper window the staged repair
// protocol can pose for one failed node is invertible.
TEST(SelectDelta, ProtocolWindowsInvertibleByDeterminant) {
  for (const auto& p : {msr3(), msr4()}) {
    Field f(p.q);
    for (int a : p.alpha) {
      Matrix psi = psi_matrix(f, phi_matrix(f, a), p.lambda);
      for (const auto& w : protocol_windows(p.nodes(), 2 * a)) EXPECT_TRUE(independent_by_det(f, psi, w));
    }
  }
}

// Any d_l rows of Psi_l independent in every layer cannot be met for q=3,
// alpha=(3,2,1) by any coefficient permutation; the selected one therefore
// fails the full check, and the report must say so.
TEST(VerifyDelta, Q3FullMinorCheckAgreesWithDeterminantOracle) {
  auto p = msr3();
  auto rep = verify_delta(p);
  EXPECT_TRUE(rep.criterion_i);
  EXPECT_FALSE(rep.sampled);
  EXPECT_TRUE(rep.protocol_windows_ok);
  Field f(3);
  bool all = true;
  for (int l = 0; l < 3; ++l) {
    const int a = p.alpha_at(l);
    Matrix psi = psi_matrix(f, phi_matrix(f, a), p.lambda);
    int singular = 0, total = 0;
    detail::for_each_combination(9, 2 * a, [&](const std::vector<int>& rows) {
      ++total;
      if (!independent_by_det(f, psi, rows)) ++singular;
      return true;
    });
    EXPECT_EQ(rep.layers[static_cast<std::size_t>(l)].subsets_checked, total);
    EXPECT_EQ(rep.layers[static_cast<std::size_t>(l)].singular_subsets, singular);
    all = all && singular == 0;
  }
  EXPECT_EQ(rep.criterion_ii, all);
  EXPECT_FALSE(all);
  ASSERT_TRUE(rep.first_failing_subset.has_value());
  const auto& [layer, rows] = *rep.first_failing_subset;
  Matrix psi = psi_matrix(f, phi_matrix(f, p.alpha_at(layer)), p.lambda);
  EXPECT_FALSE(independent_by_det(f, psi, rows));
}

TEST(VerifyDelta, Q4ExhaustiveCounts) {
  auto p = msr4();
  auto rep = verify_delta(p);
  EXPECT_FALSE(rep.sampled);
  EXPECT_TRUE(rep.protocol_windows_ok);
  const std::vector<double> totals{1820, 8008, 12870, 8008};
  for (int l = 0; l < 4; ++l) EXPECT_EQ(rep.layers[static_cast<std::size_t>(l)].subsets_checked, totals[static_cast<std::size_t>(l)]);
}

TEST(VerifyDelta, RepeatedLambdaFailsCriterionI) {
  auto p = msr3();
  p.lambda[1] = p.lambda[0];
  EXPECT_FALSE(verify_delta(p).criterion_i);
}

// lambda_g = x_g^{alpha_0} turns Psi_0 into a 2 alpha_0-column Vandermonde
// matrix, so every layer-0 subset is independent.
TEST(VerifyDelta, PowerPatternMakesLayerZeroVandermonde) {
  auto p = profile_draft(Mode::Msr, 3, 8, {3, 2, 1}, std::nullopt, 1);
  Field f(3);
  for (int g = 0; g < 9; ++g) p.lambda.push_back(f.pow(group_x_value(f, g), 3));
  std::set<Symbol> uniq(p.lambda.begin(), p.lambda.end());
  ASSERT_EQ(uniq.size(), 9u) << "gcd(3, 8) = 1 makes the cube map a permutation";
  auto rep = verify_delta(p);
  EXPECT_TRUE(rep.criterion_i);
  EXPECT_EQ(rep.layers[0].singular_subsets, 0);
  EXPECT_TRUE(rep.layers[0].all_independent);
}

TEST(CodingMatrices, PhiRowsAndAnyAlphaRowsIndependent) {
  Field f(3);
  Matrix phi = phi_matrix(f, 3);
  for (int g = 0; g < 9; ++g)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(phi(static_cast<std::size_t>(g), static_cast<std::size_t>(c)), f.pow(group_x_value(f, g), c));
  detail::for_each_combination(9, 3, [&](const std::vector<int>& rows) {
    EXPECT_NE(linalg::determinant(f, linalg::select_rows(phi, rows)), 0);
    return true;
  });
}

TEST(CodingMatrices, VAndWRows) {
  Code c(msr3());
  Field f(3);
  for (int l = 0; l < 3; ++l) {
    const int d = c.profile().d_at(l), a = c.profile().alpha_at(l);
    Matrix v = v_rows(c, 0, d - 1, l);
    EXPECT_EQ(v.rows(), static_cast<std::size_t>(2 * a));
    EXPECT_EQ(v.cols(), static_cast<std::size_t>(2 * a));
    EXPECT_TRUE(linalg::inverse(f, v).has_value());
    for (int g = 0; g < 9; ++g) {
      Matrix one = v_rows(c, g, g, l);
      for (int i = 0; i < a; ++i) {
        EXPECT_EQ(one(0, static_cast<std::size_t>(i)), c.phi(l)(static_cast<std::size_t>(g), static_cast<std::size_t>(i)));
        EXPECT_EQ(one(0, static_cast<std::size_t>(a + i)), f.mul(c.lambda(g), c.phi(l)(static_cast<std::size_t>(g), static_cast<std::size_t>(i))));
      }
    }
  }
  Code m(profile_new(Mode::Mbr, 3, 8, {3, 2, 1}, std::nullopt, 1));
  for (int l = 0; l < 3; ++l) {
    Matrix w = w_rows(m, 0, 0, l);
    EXPECT_EQ(w(0, 0), 1);
    for (std::size_t i = 1; i < w.cols(); ++i) EXPECT_EQ(w(0, i), 0);
  }
  EXPECT_THROW(v_rows(c, 3, 2, 0), Error);
  EXPECT_THROW(v_rows(c, 0, 9, 0), Error);
  EXPECT_THROW(w_rows(m, 0, 1, 3), Error);
}

TEST(ProfileText, RoundTripAndDigest) {
  for (const auto& p : {msr3(), msr4(), profile_new(Mode::Mbr, 3, 8, {3, 2, 1}, std::vector<int>{2, 2, 1}, 9)}) {
    auto text = profile_to_text(p);
    auto back = profile_from_text(text);
    EXPECT_EQ(back, p);
    EXPECT_EQ(profile_to_text(back), text);
    EXPECT_EQ(profile_digest(back), profile_digest(p));
  }
  auto p = msr3();
  auto q = p;
  q.seed = 2;
  EXPECT_NE(profile_digest(p), profile_digest(q));
}

TEST(ProfileText, KeysSortedOnePerLine) {
  auto text = profile_to_text(msr3());
  std::vector<std::string> keys;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) keys.push_back(line.substr(0, line.find('=')));
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(keys.size(), 11u);
  EXPECT_EQ(text.back(), '\n');
}

TEST(ProfileText, RejectsCorruptDocuments) {
  auto text = profile_to_text(msr3());
  auto replace = [&](const std::string& from, const std::string& to) {
    auto t = text;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  EXPECT_EQ(kind_of([&] { profile_from_text(replace("B=54", "B=55")); }), ErrorKind::BadFormat);
  EXPECT_EQ(kind_of([&] { profile_from_text(replace("mode=msr", "mode=xyz")); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([&] { profile_from_text("q=3\n"); }), ErrorKind::BadFormat);
  auto p = msr3();
  auto dup = profile_to_text(p);
  auto lam = "lambda=" + detail::join(p.lambda);
  std::vector<Symbol> bad = p.lambda;
  bad[1] = bad[0];
  EXPECT_EQ(kind_of([&] { profile_from_text(replace(lam, "lambda=" + detail::join(bad))); }), ErrorKind::BadFormat);
}
