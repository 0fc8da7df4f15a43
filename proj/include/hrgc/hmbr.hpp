#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hrgc/code.hpp"
#include "hrgc/engine.hpp"
#include "hrgc/hmsr.hpp"
#include "hrgc/mds.hpp"
#include "hrgc/repair.hpp"

namespace hrgc::mbr {

// m[l][t] = [[S, T], [T^T, 0]] with S symmetric k_l x k_l and T k_l x (alpha_l - k_l).
struct MessageMatrixM {
  std::vector<std::vector<Matrix>> m;

  bool operator==(const MessageMatrixM&) const = default;
};

namespace detail {
inline void require_mbr(const CodeProfile& p) {
  if (p.mode != Mode::Mbr) throw Error(ErrorKind::InvalidParams, "operation needs an MBR profile");
}
}  // namespace detail

// Per block: S upper triangle row-major, then T row-major.
inline MessageMatrixM arrange_m(const CodeProfile& p, const std::vector<Symbol>& message) {
  detail::require_mbr(p);
  if (static_cast<long long>(message.size()) != p.B)
    throw Error(ErrorKind::LengthMismatch, "message has " + std::to_string(message.size()) + " symbols, B=" + std::to_string(p.B));
  MessageMatrixM mm;
  std::size_t pos = 0;
  for (int l = 0; l < p.q; ++l) {
    const auto a = static_cast<std::size_t>(p.alpha_at(l));
    const auto k = static_cast<std::size_t>(p.k_at(l));
    std::vector<Matrix> layer;
    for (int t = 0; t < p.blocks(l); ++t) {
      Matrix m(a, a);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) m(i, j) = m(j, i) = message[pos++];
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = k; j < a; ++j) m(i, j) = m(j, i) = message[pos++];
      layer.push_back(std::move(m));
    }
    mm.m.push_back(std::move(layer));
  }
  return mm;
}

inline std::vector<Symbol> flatten_m(const CodeProfile& p, const MessageMatrixM& mm) {
  detail::require_mbr(p);
  std::vector<Symbol> out;
  out.reserve(static_cast<std::size_t>(p.B));
  for (int l = 0; l < p.q; ++l) {
    const auto a = static_cast<std::size_t>(p.alpha_at(l));
    const auto k = static_cast<std::size_t>(p.k_at(l));
    for (const auto& m : mm.m[static_cast<std::size_t>(l)]) {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) out.push_back(m(i, j));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = k; j < a; ++j) out.push_back(m(i, j));
    }
  }
  return out;
}

// Y = H(M).
inline std::vector<NodeState> encode_mbr(const Code& c, const MessageMatrixM& mm) {
  detail::require_mbr(c.profile());
  return msr::detail::split_nodes(c, msr::detail::encode_columns(c, mm.m));
}

inline RepairReport regenerate_mbr_plain(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  detail::require_mbr(c.profile());
  return hrgc::detail::regenerate_direct(c, z, batches, OpMode::Plain);
}

inline RepairReport regenerate_mbr_detect(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  detail::require_mbr(c.profile());
  return hrgc::detail::regenerate_direct(c, z, batches, OpMode::Detect);
}

inline RepairReport regenerate_mbr_recover(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  detail::require_mbr(c.profile());
  return hrgc::detail::regenerate_recover(c, z, batches);
}

// R = W M for the k_l responders in ids, W = [Omega | Delta_part].
inline Matrix extract_m(const Code& c, const Matrix& r, const std::vector<int>& ids, int l) {
  detail::require_mbr(c.profile());
  const auto a = static_cast<std::size_t>(c.profile().alpha_at(l));
  const auto k = static_cast<std::size_t>(c.profile().k_at(l));
  if (r.rows() != k || ids.size() != k || r.cols() != a)
    throw Error(ErrorKind::LengthMismatch, "extraction needs k_l rows of alpha_l symbols");
  const Field& f = c.field();
  Matrix w = linalg::select_rows(c.phi(l), ids);
  auto omega_inv = linalg::inverse(f, linalg::block(w, 0, 0, k, k));
  if (!omega_inv) throw Error(ErrorKind::SingularSystem, "responder evaluation points collide");
  Matrix delta = linalg::block(w, 0, k, k, a - k);
  Matrix t = linalg::mul(f, *omega_inv, linalg::block(r, 0, k, k, a - k));
  Matrix r1 = linalg::block(r, 0, 0, k, k);
  if (a > k) r1 = linalg::sub(f, r1, linalg::mul(f, delta, linalg::transpose(t)));
  Matrix s = linalg::mul(f, *omega_inv, r1);
  if (!linalg::is_symmetric(s))
    throw Error(ErrorKind::AsymmetryDetected, "extracted layer " + std::to_string(l) + " block is not symmetric");
  Matrix m(a, a);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) m(i, j) = s(i, j);
    for (std::size_t j = k; j < a; ++j) m(i, j) = m(j, i) = t(i, j - k);
  }
  return m;
}

struct RecMResult {
  Matrix m;
  std::vector<int> corrupted;
};

// rows[g] is y~_{g,l,t} or nullopt when node g is erased. T columns are decoded
// first; S columns then come from R1 - Delta T^T with the same Omega code.
inline std::variant<RecMResult, DecodeFailure> rec_m(const Code& c, const std::vector<std::optional<std::vector<Symbol>>>& rows,
                                                    int l) {
  detail::require_mbr(c.profile());
  const int n = c.nodes();
  const auto a = static_cast<std::size_t>(c.profile().alpha_at(l));
  const auto k = static_cast<std::size_t>(c.profile().k_at(l));
  if (static_cast<int>(rows.size()) != n) throw Error(ErrorKind::LengthMismatch, "rec_m needs one slot per node");
  for (const auto& r : rows)
    if (r && r->size() != a) throw Error(ErrorKind::LengthMismatch, "response row length");
  const Field& f = c.field();
  const Matrix& phi = c.phi(l);
  Matrix omega = linalg::block(phi, 0, 0, static_cast<std::size_t>(n), k);
  std::set<int> bad;
  Matrix t(k, a - k);
  for (std::size_t col = 0; col < a - k; ++col) {
    ReceivedWord w;
    w.generator = omega;
    for (int g = 0; g < n; ++g) {
      const auto& r = rows[static_cast<std::size_t>(g)];
      if (r) w.values.emplace_back((*r)[k + col]);
      else w.values.emplace_back(std::nullopt);
    }
    auto out = decode(f, w);
    auto* dr = std::get_if<DecodeResult>(&out);
    if (!dr) return std::get<DecodeFailure>(out);
    for (std::size_t i = 0; i < k; ++i) t(i, col) = dr->message[i];
    bad.insert(dr->error_positions.begin(), dr->error_positions.end());
  }
  Matrix s(k, k);
  for (std::size_t col = 0; col < k; ++col) {
    ReceivedWord w;
    w.generator = omega;
    for (int g = 0; g < n; ++g) {
      const auto& r = rows[static_cast<std::size_t>(g)];
      if (!r) {
        w.values.emplace_back(std::nullopt);
        continue;
      }
      // (Delta_g T^T)[col] = sum_e Delta_g[e] T[col][e]
      Symbol v = (*r)[col];
      for (std::size_t e = 0; e < a - k; ++e) v = f.sub(v, f.mul(phi(static_cast<std::size_t>(g), k + e), t(col, e)));
      w.values.emplace_back(v);
    }
    auto out = decode(f, w);
    auto* dr = std::get_if<DecodeResult>(&out);
    if (!dr) return std::get<DecodeFailure>(out);
    for (std::size_t i = 0; i < k; ++i) s(i, col) = dr->message[i];
    bad.insert(dr->error_positions.begin(), dr->error_positions.end());
  }
  if (!linalg::is_symmetric(s)) return DecodeFailure{DecodeFailureReason::NoCodewordWithinBudget};
  Matrix m(a, a);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) m(i, j) = s(i, j);
    for (std::size_t j = k; j < a; ++j) m(i, j) = m(j, i) = t(i, j - k);
  }
  return RecMResult{m, {bad.begin(), bad.end()}};
}

inline ReconstructReport reconstruct_mbr_direct(const Code& c, const std::vector<HelpSymbolBatch>& responses, OpMode mode) {
  detail::require_mbr(c.profile());
  const auto& p = c.profile();
  ReconstructReport rep;
  rep.mode = mode;
  MessageMatrixM mm;
  mm.m.resize(static_cast<std::size_t>(p.q));
  for (int l = 0; l < p.q; ++l) {
    auto resp = hrgc::detail::layer_contributors(c, responses, l, RequestKind::Reconstruct);
    const int a = p.alpha_at(l);
    const auto k = static_cast<std::size_t>(p.k_at(l));
    const std::size_t need = k + (mode == OpMode::Detect ? 1 : 0);
    if (resp.size() < need) throw Error(ErrorKind::NotEnoughHelpers, "layer " + std::to_string(l) + " lacks responders");
    auto set1 = msr::detail::index_range(k);
    std::vector<std::size_t> set2;
    for (std::size_t i = 1; i <= k; ++i) set2.push_back(i);
    for (int t = 0; t < p.blocks(l); ++t) {
      try {
        auto m1 = extract_m(c, msr::detail::stack_block(resp, set1, l, t, a), msr::detail::ids_at(resp, set1), l);
        if (mode == OpMode::Detect) {
          auto m2 = extract_m(c, msr::detail::stack_block(resp, set2, l, t, a), msr::detail::ids_at(resp, set2), l);
          if (!(m1 == m2)) {
            rep.outcome = Outcome::DetectionAlarm;
            rep.alarm = Alarm{l, t, "the two responder sets extract different blocks"};
            return rep;
          }
        }
        mm.m[static_cast<std::size_t>(l)].push_back(std::move(m1));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::AsymmetryDetected) throw;
        rep.outcome = Outcome::DetectionAlarm;
        rep.alarm = Alarm{l, t, "extracted block is not symmetric"};
        return rep;
      }
    }
    rep.tallies.push_back({l, 0, 0, 0});
  }
  rep.message = flatten_m(p, mm);
  return rep;
}

inline ReconstructReport reconstruct_mbr_plain(const Code& c, const std::vector<HelpSymbolBatch>& responses) {
  return reconstruct_mbr_direct(c, responses, OpMode::Plain);
}

inline ReconstructReport reconstruct_mbr_detect(const Code& c, const std::vector<HelpSymbolBatch>& responses) {
  return reconstruct_mbr_direct(c, responses, OpMode::Detect);
}

inline ReconstructReport reconstruct_mbr_recover(const Code& c, const std::vector<HelpSymbolBatch>& responses) {
  detail::require_mbr(c.profile());
  const auto& p = c.profile();
  const int n = p.nodes();
  ReconstructReport rep;
  rep.mode = OpMode::Recover;
  std::vector<const HelpSymbolBatch*> by_id(static_cast<std::size_t>(n), nullptr);
  for (int l = 0; l < p.q; ++l) hrgc::detail::layer_contributors(c, responses, l, RequestKind::Reconstruct);
  for (const auto& b : responses) {
    if (b.level != p.q - 1) throw Error(ErrorKind::InvalidParams, "recovery needs every responder at the deepest level");
    by_id[static_cast<std::size_t>(b.helper)] = &b;
  }
  MessageMatrixM mm;
  mm.m.resize(static_cast<std::size_t>(p.q));
  std::set<int> flagged;
  const int cap_global = (n - p.k.back()) / 2;
  for (int l = p.q - 1; l >= 0; --l) {
    const int a = p.alpha_at(l);
    LayerTally tally{l, 0, 0, 0};
    const int cap = std::min(n - p.k_at(l), cap_global);
    for (int t = 0; t < p.blocks(l); ++t) {
      std::vector<std::optional<std::vector<Symbol>>> rows(static_cast<std::size_t>(n));
      int erasures = 0;
      for (int g = 0; g < n; ++g) {
        const auto* b = by_id[static_cast<std::size_t>(g)];
        if (!b || flagged.count(g)) {
          ++erasures;
          continue;
        }
        const auto& row = b->layers[static_cast<std::size_t>(l)];
        rows[static_cast<std::size_t>(g)] = std::vector<Symbol>(row.begin() + t * a, row.begin() + (t + 1) * a);
      }
      if (t == 0) tally.erasures = erasures;
      // The threshold counts nodes caught misbehaving; silent nodes are
      // erasures the decoder itself accounts for.
      if (static_cast<int>(flagged.size()) > cap) {
        rep.outcome = Outcome::DecodeFailure;
        rep.detail = "layer " + std::to_string(l) + ": " + std::to_string(flagged.size()) +
                     " corrupt nodes detected exceed the limit " + std::to_string(cap);
        rep.corrupted_nodes = hrgc::detail::sorted_ids(flagged);
        rep.tallies.push_back(tally);
        return rep;
      }
      auto out = rec_m(c, rows, l);
      if (std::holds_alternative<DecodeFailure>(out)) {
        rep.outcome = Outcome::DecodeFailure;
        rep.detail = "layer " + std::to_string(l) + " block " + std::to_string(t) + ": responses are not decodable";
        rep.corrupted_nodes = hrgc::detail::sorted_ids(flagged);
        rep.tallies.push_back(tally);
        return rep;
      }
      auto& res = std::get<RecMResult>(out);
      tally.errors += static_cast<int>(res.corrupted.size());
      for (int g : res.corrupted)
        if (flagged.insert(g).second) ++tally.newly_flagged;
      mm.m[static_cast<std::size_t>(l)].push_back(std::move(res.m));
    }
    rep.tallies.push_back(tally);
  }
  rep.corrupted_nodes = hrgc::detail::sorted_ids(flagged);
  rep.message = flatten_m(p, mm);
  return rep;
}

}  // namespace hrgc::mbr
