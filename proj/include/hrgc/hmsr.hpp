#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hrgc/code.hpp"
#include "hrgc/engine.hpp"
#include "hrgc/hermitian.hpp"
#include "hrgc/mds.hpp"
#include "hrgc/repair.hpp"

namespace hrgc::msr {

// s[l][t] and t[l][t]: the symmetric alpha_l x alpha_l blocks of layer l.
struct MessageMatricesST {
  std::vector<std::vector<Matrix>> s;
  std::vector<std::vector<Matrix>> t;

  bool operator==(const MessageMatricesST&) const = default;
};

namespace detail {

inline void require_msr(const CodeProfile& p) {
  if (p.mode != Mode::Msr) throw Error(ErrorKind::InvalidParams, "operation needs an MSR profile");
}

inline Matrix fill_symmetric(int a, const std::vector<Symbol>& msg, std::size_t& pos) {
  Matrix m(static_cast<std::size_t>(a), static_cast<std::size_t>(a));
  for (int i = 0; i < a; ++i)
    for (int j = i; j < a; ++j) {
      Symbol v = msg[pos++];
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
      m(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v;
    }
  return m;
}

inline void read_upper(const Matrix& m, std::vector<Symbol>& out) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) out.push_back(m(i, j));
}

}  // namespace detail

// S takes the first B/2 symbols and T the rest; within each, layers ascend,
// blocks ascend, and every block is its upper triangle in row-major order.
inline MessageMatricesST arrange_st(const CodeProfile& p, const std::vector<Symbol>& message) {
  detail::require_msr(p);
  if (static_cast<long long>(message.size()) != p.B)
    throw Error(ErrorKind::LengthMismatch, "message has " + std::to_string(message.size()) + " symbols, B=" + std::to_string(p.B));
  MessageMatricesST st;
  std::size_t pos = 0;
  for (auto* dst : {&st.s, &st.t}) {
    for (int l = 0; l < p.q; ++l) {
      std::vector<Matrix> layer;
      for (int t = 0; t < p.blocks(l); ++t) layer.push_back(detail::fill_symmetric(p.alpha_at(l), message, pos));
      dst->push_back(std::move(layer));
    }
  }
  return st;
}

inline std::vector<Symbol> flatten_st(const CodeProfile& p, const MessageMatricesST& st) {
  detail::require_msr(p);
  std::vector<Symbol> out;
  out.reserve(static_cast<std::size_t>(p.B));
  for (const auto* src : {&st.s, &st.t})
    for (int l = 0; l < p.q; ++l)
      for (int t = 0; t < p.blocks(l); ++t) detail::read_upper((*src)[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)], out);
  return out;
}

namespace detail {

// Hermitian-encodes every column of the stacked layer blocks: column c takes
// column (c mod alpha_l) of block (c / alpha_l) as the coefficients of f_l.
inline Matrix encode_columns(const Code& c, const std::vector<std::vector<Matrix>>& blocks) {
  const auto& p = c.profile();
  const std::size_t rows = static_cast<std::size_t>(p.q) * static_cast<std::size_t>(p.nodes());
  Matrix out(rows, static_cast<std::size_t>(p.A));
  for (long long col = 0; col < p.A; ++col) {
    MessagePolynomial poly;
    for (int l = 0; l < p.q; ++l) {
      const int a = p.alpha_at(l);
      const Matrix& b = blocks[static_cast<std::size_t>(l)][static_cast<std::size_t>(col / a)];
      std::vector<Symbol> coeffs;
      for (int i = 0; i < a; ++i) coeffs.push_back(b(static_cast<std::size_t>(i), static_cast<std::size_t>(col % a)));
      poly.blocks.push_back(std::move(coeffs));
    }
    auto cw = encode_column(c.field(), poly, c.points());
    for (std::size_t r = 0; r < rows; ++r) out(r, static_cast<std::size_t>(col)) = cw[r];
  }
  return out;
}

inline std::vector<NodeState> split_nodes(const Code& c, const Matrix& y) {
  std::vector<NodeState> nodes;
  const auto q = static_cast<std::size_t>(c.q());
  for (int g = 0; g < c.nodes(); ++g)
    nodes.push_back({g, linalg::block(y, static_cast<std::size_t>(g) * q, 0, q, y.cols()), c.digest()});
  return nodes;
}

}  // namespace detail

// Y = H(S) + Gamma H(T), split into q-row node blocks.
inline std::vector<NodeState> encode(const Code& c, const MessageMatricesST& st) {
  detail::require_msr(c.profile());
  const Field& f = c.field();
  Matrix ys = detail::encode_columns(c, st.s);
  Matrix ytt = detail::encode_columns(c, st.t);
  const auto q = static_cast<std::size_t>(c.q());
  for (std::size_t r = 0; r < ys.rows(); ++r) {
    const Symbol lam = c.lambda(static_cast<int>(r / q));
    for (std::size_t col = 0; col < ys.cols(); ++col) f.axpy(ys(r, col), lam, ytt(r, col));
  }
  return detail::split_nodes(c, ys);
}

// ---------------------------------------------------------------------------
// Regeneration

inline RepairReport regenerate_plain(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  detail::require_msr(c.profile());
  return hrgc::detail::regenerate_direct(c, z, batches, OpMode::Plain);
}

inline RepairReport regenerate_detect(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  detail::require_msr(c.profile());
  return hrgc::detail::regenerate_direct(c, z, batches, OpMode::Detect);
}

inline RepairReport regenerate_recover(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches) {
  detail::require_msr(c.profile());
  return hrgc::detail::regenerate_recover(c, z, batches);
}

// ---------------------------------------------------------------------------
// Data extraction

struct StBlocks {
  Matrix s;
  Matrix t;
};

namespace detail {

// C and D off-diagonal entries from R^ = R Phi^T:
// R^_ij = C_ij + lambda_i D_ij and R^_ji = C_ij + lambda_j D_ij.
inline std::pair<Symbol, Symbol> split_pair(const Field& f, Symbol rij, Symbol rji, Symbol li, Symbol lj) {
  if (li == lj) throw Error(ErrorKind::LambdaCollision, "two responders share a coefficient");
  Symbol dij = f.div(f.sub(rij, rji), f.sub(li, lj));
  Symbol cij = f.sub(rij, f.mul(li, dij));
  return {cij, dij};
}

// Given off-diagonal entries P_ij = mu_i X mu_j^T for the a+1 ids, returns X.
inline Matrix solve_from_offdiag(const Code& c, const Matrix& pm, const std::vector<int>& ids, int l) {
  const Field& f = c.field();
  const int a = c.profile().alpha_at(l);
  Matrix omega_x(static_cast<std::size_t>(a), static_cast<std::size_t>(a));
  for (int i = 0; i < a; ++i) {
    std::vector<int> others;
    std::vector<Symbol> rhs;
    for (int j = 0; j <= a; ++j) {
      if (j == i) continue;
      others.push_back(ids[static_cast<std::size_t>(j)]);
      rhs.push_back(pm(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    }
    // Pi_i (mu_i X)^T = rhs, Pi_i rows = mu_j for j != i.
    auto row = linalg::solve(f, linalg::select_rows(c.phi(l), others), rhs);
    if (!row) throw Error(ErrorKind::SingularSystem, "responder evaluation points collide");
    for (int col = 0; col < a; ++col) omega_x(static_cast<std::size_t>(i), static_cast<std::size_t>(col)) = (*row)[static_cast<std::size_t>(col)];
  }
  std::vector<int> first(ids.begin(), ids.begin() + a);
  auto inv = linalg::inverse(f, linalg::select_rows(c.phi(l), first));
  if (!inv) throw Error(ErrorKind::SingularSystem, "responder evaluation points collide");
  return linalg::mul(f, *inv, omega_x);
}

}  // namespace detail

// R holds k_l = alpha_l + 1 rows y~_{i,l,t}, one per responder in ids.
inline StBlocks extract_st(const Code& c, const Matrix& r, const std::vector<int>& ids, int l) {
  detail::require_msr(c.profile());
  const int a = c.profile().alpha_at(l);
  if (static_cast<int>(r.rows()) != a + 1 || static_cast<int>(ids.size()) != a + 1 || static_cast<int>(r.cols()) != a)
    throw Error(ErrorKind::LengthMismatch, "extraction needs alpha_l+1 rows of alpha_l symbols");
  const Field& f = c.field();
  Matrix rhat = linalg::mul(f, r, linalg::transpose(linalg::select_rows(c.phi(l), ids)));
  const auto n = static_cast<std::size_t>(a + 1);
  Matrix cm(n, n), dm(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      auto [cij, dij] = detail::split_pair(f, rhat(i, j), rhat(j, i), c.lambda(ids[i]), c.lambda(ids[j]));
      cm(i, j) = cm(j, i) = cij;
      dm(i, j) = dm(j, i) = dij;
    }
  StBlocks out{detail::solve_from_offdiag(c, cm, ids, l), detail::solve_from_offdiag(c, dm, ids, l)};
  if (!linalg::is_symmetric(out.s) || !linalg::is_symmetric(out.t))
    throw Error(ErrorKind::AsymmetryDetected, "extracted layer " + std::to_string(l) + " block is not symmetric");
  return out;
}

struct RecStResult {
  Matrix s;
  Matrix t;
  std::vector<int> corrupted;
};

namespace detail {

struct TwoLevelResult {
  Matrix x;
  std::set<int> corrupted;
};

// entries(i, j) = mu_i X mu_j^T is known off the diagonal for live i and j.
// Each live column j is a length q^2-1 word of the Vandermonde code with
// message X mu_j^T; each row r of those messages is a length-q^2 word with
// message row r of X.
inline std::optional<TwoLevelResult> two_level_decode(const Code& c, const Matrix& entries,
                                                      const std::vector<bool>& live, int l) {
  const Field& f = c.field();
  const int n = c.nodes();
  const int a = c.profile().alpha_at(l);
  const Matrix& phi = c.phi(l);
  std::vector<std::optional<std::vector<Symbol>>> column_msg(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> column_errs(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (!live[static_cast<std::size_t>(j)]) continue;
    std::vector<int> rows;
    ReceivedWord w;
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      rows.push_back(i);
      if (live[static_cast<std::size_t>(i)]) w.values.emplace_back(entries(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      else w.values.emplace_back(std::nullopt);
    }
    w.generator = linalg::select_rows(phi, rows);
    auto out = decode(f, w);
    if (auto* res = std::get_if<DecodeResult>(&out)) {
      column_msg[static_cast<std::size_t>(j)] = res->message;
      for (int pos : res->error_positions) column_errs[static_cast<std::size_t>(j)].push_back(rows[static_cast<std::size_t>(pos)]);
    }
  }

  TwoLevelResult res{Matrix(static_cast<std::size_t>(a), static_cast<std::size_t>(a)), {}};
  std::set<int> bad_columns;
  for (int j = 0; j < n; ++j)
    if (live[static_cast<std::size_t>(j)] && !column_msg[static_cast<std::size_t>(j)]) bad_columns.insert(j);
  for (int r = 0; r < a; ++r) {
    ReceivedWord w;
    w.generator = phi;
    for (int j = 0; j < n; ++j) {
      const auto& m = column_msg[static_cast<std::size_t>(j)];
      if (m) w.values.emplace_back((*m)[static_cast<std::size_t>(r)]);
      else w.values.emplace_back(std::nullopt);
    }
    auto out = decode(f, w);
    auto* dr = std::get_if<DecodeResult>(&out);
    if (!dr) return std::nullopt;
    for (int col = 0; col < a; ++col) res.x(static_cast<std::size_t>(r), static_cast<std::size_t>(col)) = dr->message[static_cast<std::size_t>(col)];
    bad_columns.insert(dr->error_positions.begin(), dr->error_positions.end());
  }
  res.corrupted = bad_columns;
  for (int j = 0; j < n; ++j)
    if (live[static_cast<std::size_t>(j)] && !bad_columns.count(j))
      res.corrupted.insert(column_errs[static_cast<std::size_t>(j)].begin(), column_errs[static_cast<std::size_t>(j)].end());
  return res;
}

}  // namespace detail

// rows[g] is y~_{g,l,t} (alpha_l symbols) or nullopt when node g is erased.
inline std::variant<RecStResult, DecodeFailure> rec_st(const Code& c, const std::vector<std::optional<std::vector<Symbol>>>& rows,
                                                      int l) {
  detail::require_msr(c.profile());
  const int n = c.nodes();
  const int a = c.profile().alpha_at(l);
  if (static_cast<int>(rows.size()) != n) throw Error(ErrorKind::LengthMismatch, "rec_st needs one slot per node");
  const Field& f = c.field();
  std::vector<bool> live(static_cast<std::size_t>(n));
  Matrix rhat(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    live[static_cast<std::size_t>(i)] = r.has_value();
    if (!r) continue;
    if (static_cast<int>(r->size()) != a) throw Error(ErrorKind::LengthMismatch, "response row length");
    for (int j = 0; j < n; ++j)
      rhat(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = linalg::dot(f, *r, c.phi(l).row(static_cast<std::size_t>(j)));
  }
  Matrix cm(static_cast<std::size_t>(n), static_cast<std::size_t>(n)), dm(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!live[static_cast<std::size_t>(i)] || !live[static_cast<std::size_t>(j)]) continue;
      auto [cij, dij] = detail::split_pair(f, rhat(static_cast<std::size_t>(i), static_cast<std::size_t>(j)),
                                           rhat(static_cast<std::size_t>(j), static_cast<std::size_t>(i)), c.lambda(i), c.lambda(j));
      cm(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = cm(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = cij;
      dm(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = dm(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = dij;
    }
  auto s = detail::two_level_decode(c, cm, live, l);
  if (!s) return DecodeFailure{DecodeFailureReason::NoCodewordWithinBudget};
  auto t = detail::two_level_decode(c, dm, live, l);
  if (!t) return DecodeFailure{DecodeFailureReason::NoCodewordWithinBudget};
  if (!linalg::is_symmetric(s->x) || !linalg::is_symmetric(t->x)) return DecodeFailure{DecodeFailureReason::NoCodewordWithinBudget};
  std::set<int> bad = s->corrupted;
  bad.insert(t->corrupted.begin(), t->corrupted.end());
  return RecStResult{s->x, t->x, {bad.begin(), bad.end()}};
}

// ---------------------------------------------------------------------------
// Reconstruction

namespace detail {

inline Matrix stack_block(const std::vector<const HelpSymbolBatch*>& resp, const std::vector<std::size_t>& which, int l, int t,
                          int a) {
  Matrix r(which.size(), static_cast<std::size_t>(a));
  for (std::size_t i = 0; i < which.size(); ++i) {
    const auto& row = resp[which[i]]->layers[static_cast<std::size_t>(l)];
    for (int c = 0; c < a; ++c) r(i, static_cast<std::size_t>(c)) = row[static_cast<std::size_t>(t * a + c)];
  }
  return r;
}

inline std::vector<int> ids_at(const std::vector<const HelpSymbolBatch*>& resp, const std::vector<std::size_t>& which) {
  std::vector<int> ids;
  for (auto w : which) ids.push_back(resp[w]->helper);
  return ids;
}

inline std::vector<std::size_t> index_range(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace detail

inline ReconstructReport reconstruct_direct(const Code& c, const std::vector<HelpSymbolBatch>& responses, OpMode mode) {
  detail::require_msr(c.profile());
  const auto& p = c.profile();
  ReconstructReport rep;
  rep.mode = mode;
  MessageMatricesST st;
  st.s.resize(static_cast<std::size_t>(p.q));
  st.t.resize(static_cast<std::size_t>(p.q));
  for (int l = 0; l < p.q; ++l) {
    auto resp = hrgc::detail::layer_contributors(c, responses, l, RequestKind::Reconstruct);
    const int a = p.alpha_at(l);
    const auto k = static_cast<std::size_t>(p.k_at(l));
    const std::size_t need = k + (mode == OpMode::Detect ? 1 : 0);
    if (resp.size() < need) throw Error(ErrorKind::NotEnoughHelpers, "layer " + std::to_string(l) + " lacks responders");
    auto set1 = detail::index_range(k);
    std::vector<std::size_t> set2 = set1;
    set2.back() = k;  // {0..alpha_l-1, alpha_l+1}
    for (int t = 0; t < p.blocks(l); ++t) {
      try {
        auto b1 = extract_st(c, detail::stack_block(resp, set1, l, t, a), detail::ids_at(resp, set1), l);
        if (mode == OpMode::Detect) {
          auto b2 = extract_st(c, detail::stack_block(resp, set2, l, t, a), detail::ids_at(resp, set2), l);
          if (!(b1.s == b2.s) || !(b1.t == b2.t)) {
            rep.outcome = Outcome::DetectionAlarm;
            rep.alarm = Alarm{l, t, "the two responder sets extract different blocks"};
            return rep;
          }
        }
        st.s[static_cast<std::size_t>(l)].push_back(b1.s);
        st.t[static_cast<std::size_t>(l)].push_back(b1.t);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::AsymmetryDetected) throw;
        rep.outcome = Outcome::DetectionAlarm;
        rep.alarm = Alarm{l, t, "extracted block is not symmetric"};
        return rep;
      }
    }
    rep.tallies.push_back({l, 0, 0, 0});
  }
  rep.message = flatten_st(p, st);
  return rep;
}

inline ReconstructReport reconstruct_plain(const Code& c, const std::vector<HelpSymbolBatch>& responses) {
  return reconstruct_direct(c, responses, OpMode::Plain);
}

inline ReconstructReport reconstruct_detect(const Code& c, const std::vector<HelpSymbolBatch>& responses) {
  return reconstruct_direct(c, responses, OpMode::Detect);
}

inline ReconstructReport reconstruct_recover(const Code& c, const std::vector<HelpSymbolBatch>& responses) {
  detail::require_msr(c.profile());
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
  MessageMatricesST st;
  st.s.resize(static_cast<std::size_t>(p.q));
  st.t.resize(static_cast<std::size_t>(p.q));
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
      auto out = rec_st(c, rows, l);
      if (std::holds_alternative<DecodeFailure>(out)) {
        rep.outcome = Outcome::DecodeFailure;
        rep.detail = "layer " + std::to_string(l) + " block " + std::to_string(t) + ": responses are not decodable";
        rep.corrupted_nodes = hrgc::detail::sorted_ids(flagged);
        rep.tallies.push_back(tally);
        return rep;
      }
      auto& res = std::get<RecStResult>(out);
      tally.errors += static_cast<int>(res.corrupted.size());
      for (int g : res.corrupted)
        if (flagged.insert(g).second) ++tally.newly_flagged;
      st.s[static_cast<std::size_t>(l)].push_back(res.s);
      st.t[static_cast<std::size_t>(l)].push_back(res.t);
    }
    rep.tallies.push_back(tally);
  }
  rep.corrupted_nodes = hrgc::detail::sorted_ids(flagged);
  rep.message = flatten_st(p, st);
  return rep;
}

}  // namespace hrgc::msr
