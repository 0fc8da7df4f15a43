#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "hrgc/error.hpp"
#include "hrgc/gf.hpp"
#include "hrgc/matrix.hpp"

namespace hrgc {

// values[i] == nullopt marks an erasure.
struct ReceivedWord {
  std::vector<std::optional<Symbol>> values;
  Matrix generator;  // n x k
  std::optional<int> tau_max;
};

struct DecodeResult {
  std::vector<Symbol> message;
  std::vector<Symbol> codeword;
  std::vector<int> error_positions;
  std::vector<int> erasure_positions;
};

enum class DecodeFailureReason {
  TooManyErasures,
  NoCodewordWithinBudget,
  // A second codeword lies within the search radius; only reported when the
  // caller asked for a uniqueness check (generators that are not known MDS).
  Ambiguous,
};

struct DecodeFailure {
  DecodeFailureReason reason;
};

using DecodeOutcome = std::variant<DecodeResult, DecodeFailure>;

struct DecodeOptions {
  bool require_unique = false;
  // Vandermonde generators (rows [1, x, ..., x^{k-1}], distinct x) are decoded
  // by Berlekamp-Welch instead of support search. Same result whenever
  // tau_max stays within half the redundancy.
  bool allow_fast_path = true;
};

namespace detail {

// Calls fn(subset) for each size-r subset of pool, lexicographic in pool order.
template <class Fn>
bool for_each_subset(const std::vector<int>& pool, int r, Fn&& fn) {
  const int n = static_cast<int>(pool.size());
  if (r > n) return true;
  std::vector<int> idx(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::vector<int> subset(static_cast<std::size_t>(r));
  while (true) {
    for (int i = 0; i < r; ++i) subset[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    if (!fn(subset)) return false;
    int i = r - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) return true;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline linalg::SystemSolution solve_excluding(const Field& f, const Matrix& g, const std::vector<int>& live,
                                              const std::vector<Symbol>& values, const std::vector<int>& excluded) {
  std::vector<int> rows;
  rows.reserve(live.size());
  std::size_t e = 0;
  for (int p : live) {
    if (e < excluded.size() && excluded[e] == p) {
      ++e;
      continue;
    }
    rows.push_back(p);
  }
  Matrix sub = linalg::select_rows(g, rows);
  std::vector<Symbol> rhs;
  rhs.reserve(rows.size());
  for (int p : rows) rhs.push_back(values[static_cast<std::size_t>(p)]);
  return linalg::solve_system(f, sub, rhs);
}

// Evaluation points if every live row is [1, x, ..., x^{k-1}] with distinct x.
inline std::optional<std::vector<Symbol>> vandermonde_points(const Field& f, const Matrix& g,
                                                             const std::vector<int>& live) {
  std::vector<Symbol> xs;
  std::vector<bool> seen(static_cast<std::size_t>(f.order()), false);
  const std::size_t k = g.cols();
  for (int p : live) {
    auto row = g.row(static_cast<std::size_t>(p));
    if (row[0] != 1) return std::nullopt;
    Symbol x = k > 1 ? row[1] : Symbol{0};
    if (k > 1) {
      Symbol v = 1;
      for (std::size_t c = 0; c < k; ++c) {
        if (row[c] != v) return std::nullopt;
        v = f.mul(v, x);
      }
      if (seen[x]) return std::nullopt;
      seen[x] = true;
    }
    xs.push_back(x);
  }
  if (k == 1) return std::nullopt;
  return xs;
}

// Berlekamp-Welch: find E (monic, degree tau) and Q (degree < k + tau) with
// Q(x_i) = r_i E(x_i) on every live position, then f = Q / E.
inline std::optional<std::vector<Symbol>> berlekamp_welch(const Field& f, const std::vector<Symbol>& xs,
                                                          const std::vector<Symbol>& r, int k, int tau) {
  const std::size_t n = xs.size();
  const std::size_t nq = static_cast<std::size_t>(k + tau);
  const std::size_t ne = static_cast<std::size_t>(tau);
  Matrix a(n, nq + ne);
  std::vector<Symbol> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    Symbol v = 1;
    for (std::size_t c = 0; c < nq; ++c) {
      a(i, c) = v;
      if (c < ne) a(i, nq + c) = f.neg(f.mul(r[i], v));
      v = f.mul(v, xs[i]);
    }
    rhs[i] = f.mul(r[i], f.pow(xs[i], tau));
  }
  auto s = linalg::solve_system(f, a, rhs);
  if (!s.consistent) return std::nullopt;
  std::vector<Symbol> qpoly(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(nq));
  std::vector<Symbol> epoly(s.x.begin() + static_cast<std::ptrdiff_t>(nq), s.x.end());
  epoly.push_back(1);
  // Long division of qpoly by the monic epoly.
  std::vector<Symbol> quot(static_cast<std::size_t>(k), 0);
  for (std::size_t i = nq; i-- > ne;) {
    Symbol c = qpoly[i];
    quot[i - ne] = c;
    if (c == 0) continue;
    for (std::size_t j = 0; j <= ne; ++j) qpoly[i - ne + j] = f.sub(qpoly[i - ne + j], f.mul(c, epoly[j]));
  }
  for (std::size_t i = 0; i < ne; ++i)
    if (qpoly[i] != 0) return std::nullopt;
  return quot;
}

}  // namespace detail

// Errors-and-erasures decoding by support search: for tau = 0, 1, ..., tau_max
// every candidate error support (lexicographic) is removed and the remaining
// positions are solved jointly; the first consistent, fully determined
// solution wins.
inline DecodeOutcome decode(const Field& f, const ReceivedWord& w, const DecodeOptions& opt = {}) {
  const Matrix& g = w.generator;
  const int n = static_cast<int>(g.rows());
  const int k = static_cast<int>(g.cols());
  if (static_cast<int>(w.values.size()) != n) throw Error(ErrorKind::LengthMismatch, "received word length");
  if (k < 1) throw Error(ErrorKind::InvalidParams, "generator needs at least one column");

  std::vector<int> live, erased;
  std::vector<Symbol> vals(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    if (w.values[static_cast<std::size_t>(i)]) {
      live.push_back(i);
      vals[static_cast<std::size_t>(i)] = *w.values[static_cast<std::size_t>(i)];
    } else {
      erased.push_back(i);
    }
  }
  const int nl = static_cast<int>(live.size());
  if (nl < k) return DecodeFailure{DecodeFailureReason::TooManyErasures};
  int tau_max = w.tau_max ? *w.tau_max : (nl - k) / 2;
  tau_max = std::max(0, std::min(tau_max, nl - k));

  std::optional<std::vector<Symbol>> found;
  bool ambiguous = false;
  bool searched = false;
  if (opt.allow_fast_path && tau_max <= (nl - k) / 2) {
    if (auto xs = detail::vandermonde_points(f, g, live)) {
      std::vector<Symbol> r;
      for (int p : live) r.push_back(vals[static_cast<std::size_t>(p)]);
      found = detail::berlekamp_welch(f, *xs, r, k, tau_max);
      if (found) {
        auto cw = linalg::mul(f, g, *found);
        int errs = 0;
        for (int p : live)
          if (cw[static_cast<std::size_t>(p)] != vals[static_cast<std::size_t>(p)]) ++errs;
        if (errs > tau_max) found.reset();
      }
      searched = true;
    }
  }
  for (int tau = 0; !searched && tau <= tau_max && !found && !ambiguous; ++tau) {
    detail::for_each_subset(live, tau, [&](const std::vector<int>& support) {
      auto s = detail::solve_excluding(f, g, live, vals, support);
      if (!s.consistent) return true;
      if (!s.unique) {
        if (opt.require_unique) {
          ambiguous = true;
          return false;
        }
        return true;
      }
      found = std::move(s.x);
      return false;
    });
  }
  if (ambiguous) return DecodeFailure{DecodeFailureReason::Ambiguous};
  if (!found) return DecodeFailure{DecodeFailureReason::NoCodewordWithinBudget};

  if (opt.require_unique && !searched) {
    // Any rival codeword within tau_max of the word agrees with it outside
    // some support of exactly tau_max positions.
    detail::for_each_subset(live, tau_max, [&](const std::vector<int>& support) {
      auto s = detail::solve_excluding(f, g, live, vals, support);
      if (s.consistent && (!s.unique || s.x != *found)) {
        ambiguous = true;
        return false;
      }
      return true;
    });
    if (ambiguous) return DecodeFailure{DecodeFailureReason::Ambiguous};
  }

  DecodeResult r;
  r.message = *found;
  r.codeword = linalg::mul(f, g, r.message);
  for (int p : live)
    if (r.codeword[static_cast<std::size_t>(p)] != vals[static_cast<std::size_t>(p)]) r.error_positions.push_back(p);
  r.erasure_positions = erased;
  return r;
}

struct ErasureSolveFailure {
  enum class Kind { Underdetermined, Inconsistent } kind;
  std::vector<int> positions;  // disagreeing positions for Inconsistent
};

using ErasureSolveOutcome = std::variant<std::vector<Symbol>, ErasureSolveFailure>;

// Solves from the lowest-index k non-erased positions and checks the rest.
inline ErasureSolveOutcome erasure_solve(const Field& f, const Matrix& generator,
                                         const std::vector<std::optional<Symbol>>& values) {
  const int n = static_cast<int>(generator.rows());
  const int k = static_cast<int>(generator.cols());
  if (static_cast<int>(values.size()) != n) throw Error(ErrorKind::LengthMismatch, "value count");
  std::vector<int> live;
  for (int i = 0; i < n; ++i)
    if (values[static_cast<std::size_t>(i)]) live.push_back(i);
  if (static_cast<int>(live.size()) < k) return ErasureSolveFailure{ErasureSolveFailure::Kind::Underdetermined, {}};
  std::vector<int> basis(live.begin(), live.begin() + k);
  std::vector<Symbol> rhs;
  for (int p : basis) rhs.push_back(*values[static_cast<std::size_t>(p)]);
  auto x = linalg::solve(f, linalg::select_rows(generator, basis), rhs);
  if (!x) return ErasureSolveFailure{ErasureSolveFailure::Kind::Underdetermined, {}};
  std::vector<int> bad;
  for (std::size_t i = static_cast<std::size_t>(k); i < live.size(); ++i) {
    int p = live[i];
    if (linalg::dot(f, generator.row(static_cast<std::size_t>(p)), *x) != *values[static_cast<std::size_t>(p)])
      bad.push_back(p);
  }
  if (bad.empty()) return *x;
  // The disagreement is relative to the basis rows, which may themselves be
  // the corrupt ones; pin the culprits down when the redundancy allows it.
  ReceivedWord w{values, generator, std::nullopt};
  auto decoded = decode(f, w);
  if (auto* r = std::get_if<DecodeResult>(&decoded); r && !r->error_positions.empty()) bad = r->error_positions;
  return ErasureSolveFailure{ErasureSolveFailure::Kind::Inconsistent, bad};
}

}  // namespace hrgc
