#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "hrgc/code.hpp"
#include "hrgc/engine.hpp"
#include "hrgc/mds.hpp"

namespace hrgc::detail {

// Turns the solved vector x of one (l, t) block into y~_{z,l,t}.
// MSR: x = [S mu^T; T mu^T], so nu_z [S; T] = x_S^T + lambda_z x_T^T by symmetry.
// MBR: x = M mu^T is already the row.
inline std::vector<Symbol> regenerated_row(const Code& c, int z, int l, const std::vector<Symbol>& x) {
  if (c.mode() == Mode::Mbr) return x;
  const auto a = static_cast<std::size_t>(c.profile().alpha_at(l));
  const Field& f = c.field();
  std::vector<Symbol> out(a);
  for (std::size_t i = 0; i < a; ++i) out[i] = f.add(x[i], f.mul(c.lambda(z), x[a + i]));
  return out;
}

inline Matrix finish_node(const Code& c, int z, const Matrix& yt) { return linalg::mul(c.field(), c.basis(z), yt); }

inline Matrix inverse_or_throw(const Code& c, const Matrix& m, int l) {
  auto inv = linalg::inverse(c.field(), m);
  if (!inv) throw Error(ErrorKind::SingularSystem, "helper rows of layer " + std::to_string(l) + " are dependent");
  return *inv;
}

inline void check_target(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  if (z < 0 || z >= c.nodes()) throw Error(ErrorKind::IndexOutOfRange, "repair target");
  for (const auto& b : batches) {
    if (b.helper == z) throw Error(ErrorKind::InvalidParams, "the failed node cannot help");
    if (b.target != z) throw Error(ErrorKind::InvalidParams, "batch was computed for another target");
  }
}

inline std::vector<Symbol> block_symbols(const std::vector<const HelpSymbolBatch*>& helpers, std::size_t from,
                                         std::size_t count, int l, int t) {
  std::vector<Symbol> p;
  for (std::size_t i = from; i < from + count; ++i)
    p.push_back(helpers[i]->layers[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]);
  return p;
}

inline RepairReport regenerate_direct(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches, OpMode mode) {
  check_target(c, z, batches);
  const auto& p = c.profile();
  const Field& f = c.field();
  RepairReport rep;
  rep.mode = mode;
  rep.target = z;
  Matrix yt(static_cast<std::size_t>(p.q), static_cast<std::size_t>(p.A));
  const int extra = mode == OpMode::Detect ? 1 : 0;

  for (int l = 0; l < p.q; ++l) {
    auto helpers = layer_contributors(c, batches, l, RequestKind::Repair);
    const auto d = static_cast<std::size_t>(p.d_at(l));
    if (helpers.size() < d + static_cast<std::size_t>(extra))
      throw Error(ErrorKind::NotEnoughHelpers, "layer " + std::to_string(l) + " has " + std::to_string(helpers.size()) +
                                                   " contributors");
    const Matrix& gen = c.repair_generator(l);
    Matrix inv1 = inverse_or_throw(c, linalg::select_rows(gen, ids_of(helpers, 0, d)), l);
    std::optional<Matrix> inv2;
    if (extra) inv2 = inverse_or_throw(c, linalg::select_rows(gen, ids_of(helpers, 1, d)), l);
    const int a = p.alpha_at(l);
    for (int t = 0; t < p.blocks(l); ++t) {
      auto x = linalg::mul(f, inv1, block_symbols(helpers, 0, d, l, t));
      if (inv2) {
        auto x2 = linalg::mul(f, *inv2, block_symbols(helpers, 1, d, l, t));
        if (x != x2) {
          rep.outcome = Outcome::DetectionAlarm;
          rep.alarm = Alarm{l, t, "the two overlapping helper sets disagree"};
          return rep;
        }
      }
      auto row = regenerated_row(c, z, l, x);
      for (int i = 0; i < a; ++i) yt(static_cast<std::size_t>(l), static_cast<std::size_t>(t * a + i)) = row[static_cast<std::size_t>(i)];
    }
    rep.tallies.push_back({l, 0, 0, 0});
  }
  rep.regenerated = finish_node(c, z, yt);
  return rep;
}

inline RepairReport regenerate_recover(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  check_target(c, z, batches);
  const auto& p = c.profile();
  const int n = p.nodes();
  RepairReport rep;
  rep.mode = OpMode::Recover;
  rep.target = z;

  std::vector<int> positions;
  for (int i = 0; i < n; ++i)
    if (i != z) positions.push_back(i);
  std::vector<const HelpSymbolBatch*> by_id(static_cast<std::size_t>(n), nullptr);
  for (const auto& b : batches) {
    if (b.level != p.q - 1) throw Error(ErrorKind::InvalidParams, "recovery needs every helper at the deepest level");
    by_id[static_cast<std::size_t>(b.helper)] = &b;
  }
  for (int l = 0; l < p.q; ++l) layer_contributors(c, batches, l, RequestKind::Repair);  // shape checks

  std::set<int> flagged;
  const int cap_global = (n - p.d.back() - 1) / 2;
  // The Psi-generated codes are not MDS in general, so a second codeword
  // within the decoding radius must be ruled out explicitly.
  DecodeOptions opts;
  opts.require_unique = c.mode() == Mode::Msr;
  Matrix yt(static_cast<std::size_t>(p.q), static_cast<std::size_t>(p.A));

  for (int l = p.q - 1; l >= 0; --l) {
    const Matrix gen = linalg::select_rows(c.repair_generator(l), positions);
    LayerTally tally{l, 0, 0, 0};
    const int a = p.alpha_at(l);
    for (int t = 0; t < p.blocks(l); ++t) {
      ReceivedWord w;
      w.generator = gen;
      int erasures = 0;
      for (int id : positions) {
        const auto* b = by_id[static_cast<std::size_t>(id)];
        if (!b || flagged.count(id)) {
          w.values.emplace_back(std::nullopt);
          ++erasures;
        } else {
          w.values.emplace_back(b->layers[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]);
        }
      }
      if (t == 0) tally.erasures = erasures;
      const int cap = std::min(n - p.d_at(l) - 1, cap_global);
      if (erasures > cap) {
        rep.outcome = Outcome::DecodeFailure;
        rep.detail = "layer " + std::to_string(l) + " block " + std::to_string(t) + ": " + std::to_string(erasures) +
                     " erased helpers exceed the limit " + std::to_string(cap);
        rep.corrupted_nodes = sorted_ids(flagged);
        rep.tallies.push_back(tally);
        return rep;
      }
      auto out = decode(c.field(), w, opts);
      if (auto* fail = std::get_if<DecodeFailure>(&out)) {
        rep.outcome = Outcome::DecodeFailure;
        rep.detail = "layer " + std::to_string(l) + " block " + std::to_string(t) + ": " +
                     (fail->reason == DecodeFailureReason::Ambiguous ? "ambiguous word" : "no codeword within budget");
        rep.corrupted_nodes = sorted_ids(flagged);
        rep.tallies.push_back(tally);
        return rep;
      }
      auto& res = std::get<DecodeResult>(out);
      tally.errors += static_cast<int>(res.error_positions.size());
      for (int pos : res.error_positions)
        if (flagged.insert(positions[static_cast<std::size_t>(pos)]).second) ++tally.newly_flagged;
      auto row = regenerated_row(c, z, l, res.message);
      for (int i = 0; i < a; ++i) yt(static_cast<std::size_t>(l), static_cast<std::size_t>(t * a + i)) = row[static_cast<std::size_t>(i)];
    }
    rep.tallies.push_back(tally);
  }
  rep.corrupted_nodes = sorted_ids(flagged);
  rep.regenerated = finish_node(c, z, yt);
  return rep;
}

}  // namespace hrgc::detail
