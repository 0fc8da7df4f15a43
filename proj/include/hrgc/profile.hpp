#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hrgc/error.hpp"
#include "hrgc/gf.hpp"
#include "hrgc/hermitian.hpp"
#include "hrgc/matrix.hpp"
#include "hrgc/rng.hpp"

namespace hrgc {

enum class Mode : std::uint8_t { Msr = 0, Mbr = 1 };

inline std::string to_string(Mode m) { return m == Mode::Msr ? "msr" : "mbr"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "msr" || s == "MSR") return Mode::Msr;
  if (s == "mbr" || s == "MBR") return Mode::Mbr;
  throw Error(ErrorKind::InvalidParams, "mode must be msr or mbr, got '" + s + "'");
}

struct CodeProfile {
  Mode mode = Mode::Msr;
  int q = 0;
  int m = 0;
  std::vector<int> kappa;
  std::vector<int> alpha;
  std::vector<int> d;
  std::vector<int> k;
  long long A = 0;
  long long B = 0;
  std::vector<Symbol> lambda;
  std::uint64_t seed = 0;

  int nodes() const { return q * q; }
  int layers() const { return q; }
  int blocks(int l) const { return static_cast<int>(A / alpha[static_cast<std::size_t>(l)]); }
  int alpha_at(int l) const { return alpha[static_cast<std::size_t>(l)]; }
  int d_at(int l) const { return d[static_cast<std::size_t>(l)]; }
  int k_at(int l) const { return k[static_cast<std::size_t>(l)]; }

  // Message symbols carried by one (l, t) block.
  long long block_symbols(int l) const {
    const long long a = alpha_at(l);
    if (mode == Mode::Msr) return a * (a + 1);
    const long long kk = k_at(l);
    return kk * (2 * a - kk + 1) / 2;
  }

  bool operator==(const CodeProfile&) const = default;
};

// ---------------------------------------------------------------------------
// Layer matrices

// Row g is [1, x_g, ..., x_g^{alpha-1}].
inline Matrix phi_matrix(const Field& f, int alpha) {
  const int n = f.order();
  Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(alpha));
  for (int g = 0; g < n; ++g) {
    Symbol x = group_x_value(f, g);
    Symbol v = 1;
    for (int c = 0; c < alpha; ++c) {
      m(static_cast<std::size_t>(g), static_cast<std::size_t>(c)) = v;
      v = f.mul(v, x);
    }
  }
  return m;
}

// [Phi, Delta * Phi].
inline Matrix psi_matrix(const Field& f, const Matrix& phi, const std::vector<Symbol>& lambda) {
  Matrix m(phi.rows(), 2 * phi.cols());
  for (std::size_t g = 0; g < phi.rows(); ++g)
    for (std::size_t c = 0; c < phi.cols(); ++c) {
      m(g, c) = phi(g, c);
      m(g, phi.cols() + c) = f.mul(lambda[g], phi(g, c));
    }
  return m;
}

// ---------------------------------------------------------------------------
// Delta selection

namespace detail {

inline bool rows_independent(const Field& f, const Matrix& psi, const std::vector<int>& rows) {
  return linalg::rank(f, linalg::select_rows(psi, rows)) == rows.size();
}

inline void for_each_combination(int n, int r, const std::function<bool(const std::vector<int>&)>& fn) {
  if (r > n || r < 0) return;
  std::vector<int> c(static_cast<std::size_t>(r));
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    if (!fn(c)) return;
    int i = r - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) return;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  double v = 1;
  for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return v;
}

}  // namespace detail

// Helper windows the staged repair protocol can pose for a single failed node z:
// the first d live ids and the window shifted by one (the second detect solve).
inline std::vector<std::vector<int>> protocol_windows(int nodes, int d) {
  std::set<std::vector<int>> s;
  for (int z = 0; z < nodes; ++z) {
    std::vector<int> live;
    for (int i = 0; i < nodes; ++i)
      if (i != z) live.push_back(i);
    if (static_cast<int>(live.size()) >= d) s.insert({live.begin(), live.begin() + d});
    if (static_cast<int>(live.size()) >= d + 1) s.insert({live.begin() + 1, live.begin() + d + 1});
  }
  return {s.begin(), s.end()};
}

// Every d-subset of the first d+2 ids: the sets whose independence makes every
// helper of a detect window observable.
inline std::vector<std::vector<int>> detect_subsets(int nodes, int d) {
  std::vector<std::vector<int>> out;
  detail::for_each_combination(std::min(nodes, d + 2), d, [&](const std::vector<int>& c) {
    out.push_back(c);
    return true;
  });
  return out;
}

struct DeltaObjective {
  int protocol_violations = 0;  // must reach zero
  int detect_violations = 0;    // minimised
  auto operator<=>(const DeltaObjective&) const = default;
};

inline DeltaObjective delta_objective(const Field& f, const std::vector<int>& alpha, const std::vector<Symbol>& lambda) {
  DeltaObjective obj;
  const int n = f.order();
  for (int a : alpha) {
    const int d = 2 * a;
    Matrix psi = psi_matrix(f, phi_matrix(f, a), lambda);
    auto windows = protocol_windows(n, d);
    std::set<std::vector<int>> hard(windows.begin(), windows.end());
    for (const auto& s : detect_subsets(n, d)) {
      if (detail::rows_independent(f, psi, s)) continue;
      if (hard.count(s)) ++obj.protocol_violations;
      else ++obj.detect_violations;
    }
  }
  return obj;
}

inline constexpr int kDeltaDraws = 64;
inline constexpr int kDeltaSwapsPerDraw = 300;

inline std::vector<Symbol> seeded_permutation(int n, Rng& rng) {
  std::vector<Symbol> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = static_cast<Symbol>(i);
  rng.shuffle(v);
  return v;
}

// Chooses the diagonal coefficients lambda_0..lambda_{q^2-1}. They are a seeded
// permutation of all q^2 symbols (q^2 distinct values in a field of q^2
// elements necessarily include zero). For MSR each draw is refined by swaps
// until every protocol window of every layer is invertible, preferring
// permutations that also keep the detect subsets invertible.
inline std::vector<Symbol> select_delta(const CodeProfile& draft, std::uint64_t seed) {
  Field f(draft.q);
  const int n = f.order();
  Rng rng(seed ^ 0x6c616d6264615fULL);
  if (draft.mode == Mode::Mbr) return seeded_permutation(n, rng);

  const int reach = std::min(n, 2 * draft.alpha.front() + 2);
  for (int draw = 0; draw < kDeltaDraws; ++draw) {
    auto lambda = seeded_permutation(n, rng);
    auto best = delta_objective(f, draft.alpha, lambda);
    for (int it = 0; it < kDeltaSwapsPerDraw && best != DeltaObjective{}; ++it) {
      auto a = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(reach)));
      auto b = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
      if (a == b) continue;
      std::swap(lambda[a], lambda[b]);
      auto cand = delta_objective(f, draft.alpha, lambda);
      if (cand <= best) best = cand;
      else std::swap(lambda[a], lambda[b]);
    }
    if (best.protocol_violations == 0) return lambda;
  }
  throw Error(ErrorKind::DeltaSearchFailed,
              "no coefficient permutation keeps the repair windows invertible after " +
                  std::to_string(kDeltaDraws) + " draws");
}

struct LayerDeltaCheck {
  int layer = 0;
  double subsets_checked = 0;
  double singular_subsets = 0;
  bool all_independent = true;
};

struct DeltaReport {
  bool criterion_i = false;
  bool criterion_ii = false;         // any d_l rows of Psi_l independent, every layer
  bool sampled = false;
  bool protocol_windows_ok = false;  // every window the staged protocol poses is invertible
  int detect_subset_violations = 0;
  std::vector<LayerDeltaCheck> layers;
  std::optional<std::pair<int, std::vector<int>>> first_failing_subset;  // (layer, rows)
};

inline constexpr double kExhaustiveLimit = 1e6;
inline constexpr int kSampledSubsets = 100000;

inline DeltaReport verify_delta(const CodeProfile& p) {
  Field f(p.q);
  const int n = f.order();
  DeltaReport r;
  std::set<Symbol> uniq(p.lambda.begin(), p.lambda.end());
  r.criterion_i = static_cast<int>(p.lambda.size()) == n && static_cast<int>(uniq.size()) == n;
  if (p.lambda.size() != static_cast<std::size_t>(n)) return r;

  double total = 0;
  for (int a : p.alpha) total += detail::binomial(n, 2 * a);
  r.sampled = total > kExhaustiveLimit;
  r.criterion_ii = true;
  r.protocol_windows_ok = true;
  Rng rng(p.seed ^ 0x7665726966ULL);

  for (int l = 0; l < p.q; ++l) {
    const int a = p.alpha_at(l);
    const int d = 2 * a;
    Matrix psi = psi_matrix(f, phi_matrix(f, a), p.lambda);
    LayerDeltaCheck lc;
    lc.layer = l;
    auto check = [&](const std::vector<int>& rows) {
      lc.subsets_checked += 1;
      if (!detail::rows_independent(f, psi, rows)) {
        lc.singular_subsets += 1;
        lc.all_independent = false;
        if (!r.first_failing_subset) r.first_failing_subset = {l, rows};
      }
    };
    if (!r.sampled) {
      detail::for_each_combination(n, d, [&](const std::vector<int>& c) {
        check(c);
        return true;
      });
    } else {
      for (int s = 0; s < kSampledSubsets; ++s) {
        std::vector<int> ids(static_cast<std::size_t>(n));
        std::iota(ids.begin(), ids.end(), 0);
        rng.shuffle(ids);
        ids.resize(static_cast<std::size_t>(d));
        std::sort(ids.begin(), ids.end());
        check(ids);
      }
    }
    r.criterion_ii = r.criterion_ii && lc.all_independent;
    r.layers.push_back(lc);
    for (const auto& w : protocol_windows(n, d))
      if (!detail::rows_independent(f, psi, w)) r.protocol_windows_ok = false;
  }
  auto obj = delta_objective(f, p.alpha, p.lambda);
  r.detect_subset_violations = obj.detect_violations;
  return r;
}

// ---------------------------------------------------------------------------
// Profile construction

inline long long lcm_of(const std::vector<int>& v) {
  long long a = 1;
  for (int x : v) {
    a = std::lcm(a, static_cast<long long>(x));
    if (a > (1LL << 24)) throw Error(ErrorKind::InvalidAlpha, "lcm of alpha too large");
  }
  return a;
}

// Checks everything except lambda and fills the derived fields.
inline CodeProfile profile_draft(Mode mode, int q, int m, const std::vector<int>& alpha,
                                 const std::optional<std::vector<int>>& k, std::uint64_t seed) {
  if (!is_supported_q(q))
    throw Error(ErrorKind::UnsupportedQ, "q=" + std::to_string(q) + " is not supported");
  CodeProfile p;
  p.mode = mode;
  p.q = q;
  p.m = m;
  p.seed = seed;
  p.kappa = kappa_sequence(q, m);
  if (static_cast<int>(alpha.size()) != q)
    throw Error(ErrorKind::InvalidAlpha, "alpha needs exactly q=" + std::to_string(q) + " entries");
  for (int i = 0; i < q; ++i) {
    const int a = alpha[static_cast<std::size_t>(i)];
    if (a <= 0) throw Error(ErrorKind::InvalidAlpha, "alpha entries must be positive");
    if (i > 0 && a >= alpha[static_cast<std::size_t>(i - 1)])
      throw Error(ErrorKind::InvalidAlpha, "alpha must be strictly decreasing");
    if (a > p.kappa[static_cast<std::size_t>(i)])
      throw Error(ErrorKind::InvalidAlpha, "alpha_" + std::to_string(i) + "=" + std::to_string(a) +
                                               " exceeds kappa=" + std::to_string(p.kappa[static_cast<std::size_t>(i)]));
  }
  p.alpha = alpha;
  const int n = q * q;
  if (mode == Mode::Msr) {
    if (k) throw Error(ErrorKind::InvalidK, "k is fixed to alpha+1 in MSR mode");
    for (int a : alpha) {
      p.d.push_back(2 * a);
      p.k.push_back(a + 1);
    }
  } else {
    std::vector<int> kk = k ? *k : alpha;
    if (static_cast<int>(kk.size()) != q) throw Error(ErrorKind::InvalidK, "k needs exactly q entries");
    for (int i = 0; i < q; ++i)
      if (kk[static_cast<std::size_t>(i)] <= 0 || kk[static_cast<std::size_t>(i)] > alpha[static_cast<std::size_t>(i)])
        throw Error(ErrorKind::InvalidK, "k_" + std::to_string(i) + " must satisfy 0 < k <= alpha");
    p.d = alpha;
    p.k = kk;
  }
  // Recovery repair decodes a length q^2-1 word of dimension d_0 and detect
  // repair needs d_0+1 helpers.
  if (p.d.front() > n - 2)
    throw Error(ErrorKind::InvalidAlpha, "d_0=" + std::to_string(p.d.front()) + " exceeds q^2-2=" + std::to_string(n - 2));
  p.A = lcm_of(alpha);
  p.B = 0;
  for (int l = 0; l < q; ++l) {
    const long long a = alpha[static_cast<std::size_t>(l)];
    if (mode == Mode::Msr) {
      p.B += p.A * (a + 1);
    } else {
      const long long kk = p.k[static_cast<std::size_t>(l)];
      const long long num = p.A * kk * (2 * a - kk + 1);
      if (num % (2 * a) != 0) throw Error(ErrorKind::InvalidK, "layer payload is not an integer");
      p.B += num / (2 * a);
    }
  }
  return p;
}

inline CodeProfile profile_new(Mode mode, int q, int m, const std::vector<int>& alpha,
                               const std::optional<std::vector<int>>& k, std::uint64_t seed) {
  CodeProfile p = profile_draft(mode, q, m, alpha, k, seed);
  p.lambda = select_delta(p, seed);
  return p;
}

// ---------------------------------------------------------------------------
// Canonical text form: key=value lines, keys sorted, LF endings.

namespace detail {
template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(static_cast<long long>(v[i]));
  }
  return s;
}

inline std::vector<long long> split_ints(const std::string& s) {
  std::vector<long long> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw Error(ErrorKind::BadFormat, "empty list entry");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadFormat, "not an integer: '" + tok + "'");
    }
    if (pos != tok.size()) throw Error(ErrorKind::BadFormat, "not an integer: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}
}  // namespace detail

inline std::string profile_to_text(const CodeProfile& p) {
  std::map<std::string, std::string> kv;
  kv["A"] = std::to_string(p.A);
  kv["B"] = std::to_string(p.B);
  kv["alpha"] = detail::join(p.alpha);
  kv["d"] = detail::join(p.d);
  kv["k"] = detail::join(p.k);
  kv["kappa"] = detail::join(p.kappa);
  kv["lambda"] = detail::join(p.lambda);
  kv["m"] = std::to_string(p.m);
  kv["mode"] = to_string(p.mode);
  kv["q"] = std::to_string(p.q);
  kv["seed"] = std::to_string(p.seed);
  std::string out;
  for (const auto& [key, val] : kv) out += key + "=" + val + "\n";
  return out;
}

inline CodeProfile profile_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::BadFormat, "profile line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::BadFormat, std::string("profile is missing key ") + key);
    return it->second;
  };
  auto to_int_vec = [](const std::vector<long long>& v) { return std::vector<int>(v.begin(), v.end()); };
  Mode mode = parse_mode(need("mode"));
  int q = static_cast<int>(detail::split_ints(need("q")).at(0));
  int m = static_cast<int>(detail::split_ints(need("m")).at(0));
  auto alpha = to_int_vec(detail::split_ints(need("alpha")));
  auto kk = to_int_vec(detail::split_ints(need("k")));
  auto seed = static_cast<std::uint64_t>(std::stoull(need("seed")));
  CodeProfile p = profile_draft(mode, q, m, alpha, mode == Mode::Mbr ? std::optional(kk) : std::nullopt, seed);
  if (p.k != kk) throw Error(ErrorKind::BadFormat, "k does not match alpha");
  for (long long v : detail::split_ints(need("lambda"))) {
    if (v < 0 || v >= q * q) throw Error(ErrorKind::BadFormat, "lambda entry out of range");
    p.lambda.push_back(static_cast<Symbol>(v));
  }
  if (static_cast<int>(p.lambda.size()) != q * q) throw Error(ErrorKind::BadFormat, "lambda needs q^2 entries");
  std::set<Symbol> uniq(p.lambda.begin(), p.lambda.end());
  if (uniq.size() != p.lambda.size()) throw Error(ErrorKind::BadFormat, "lambda entries repeat");
  if (kv.count("A") && std::stoll(kv["A"]) != p.A) throw Error(ErrorKind::BadFormat, "A does not match alpha");
  if (kv.count("B") && std::stoll(kv["B"]) != p.B) throw Error(ErrorKind::BadFormat, "B does not match alpha");
  if (kv.count("d") && to_int_vec(detail::split_ints(kv["d"])) != p.d) throw Error(ErrorKind::BadFormat, "d mismatch");
  if (kv.count("kappa") && to_int_vec(detail::split_ints(kv["kappa"])) != p.kappa)
    throw Error(ErrorKind::BadFormat, "kappa mismatch");
  return p;
}

// FNV-1a over the canonical text.
inline std::uint64_t profile_digest(const CodeProfile& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : profile_to_text(p)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace hrgc
