#pragma once

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "hrgc/error.hpp"
#include "hrgc/profile.hpp"

namespace hrgc::capability {

using Rational = boost::rational<long long>;

// Sum_{i=0}^{k-1} min{alpha, (d - i) beta}.
inline Rational cutset_bound(int k, int d, Rational alpha, Rational beta) {
  if (k <= 0 || d <= 0 || k > d) throw Error(ErrorKind::InvalidParams, "cut-set bound needs 0 < k <= d");
  if (alpha <= 0 || beta <= 0) throw Error(ErrorKind::InvalidParams, "alpha and beta must be positive");
  Rational total = 0;
  for (int i = 0; i < k; ++i) total += std::min(alpha, Rational(d - i) * beta);
  return total;
}

struct TradeoffPoint {
  Rational alpha;  // per-node storage
  Rational gamma;  // repair bandwidth
};

// alpha = B/k, gamma = B d / (k (d - k + 1)).
inline TradeoffPoint msr_point(Rational b, int k, int d) {
  if (k <= 0 || k > d) throw Error(ErrorKind::InvalidParams, "MSR point needs 0 < k <= d");
  return {b / k, b * d / (Rational(k) * (d - k + 1))};
}

// alpha = gamma = 2 B d / (k (2d - k + 1)).
inline TradeoffPoint mbr_point(Rational b, int k, int d) {
  if (k <= 0 || k > d) throw Error(ErrorKind::InvalidParams, "MBR point needs 0 < k <= d");
  const Rational v = Rational(2) * b * d / (Rational(k) * (2 * d - k + 1));
  return {v, v};
}

// One layer viewed as a stand-alone regenerating code: each node stores A
// symbols of it, each helper sends beta = A / alpha_l.
struct LayerIdentity {
  int layer = 0;
  Rational payload;
  Rational storage;
  Rational beta;
  Rational bandwidth;  // d beta
  TradeoffPoint point;
  Rational cutset;
  bool point_ok = false;
  bool cutset_ok = false;
};

inline Rational layer_payload(const CodeProfile& p, int l) {
  const long long a = p.alpha_at(l), k = p.k_at(l);
  if (p.mode == Mode::Msr) return Rational(p.A * (a + 1));
  return Rational(p.A * k * (2 * a - k + 1), 2 * a);
}

inline std::vector<LayerIdentity> layer_identities(const CodeProfile& p) {
  std::vector<LayerIdentity> out;
  for (int l = 0; l < p.q; ++l) {
    LayerIdentity li;
    li.layer = l;
    li.payload = layer_payload(p, l);
    li.storage = Rational(p.A);
    li.beta = Rational(p.A, p.alpha_at(l));
    li.bandwidth = li.beta * p.d_at(l);
    const int k = p.k_at(l), d = p.d_at(l);
    li.point = p.mode == Mode::Msr ? msr_point(li.payload, k, d) : mbr_point(li.payload, k, d);
    li.cutset = cutset_bound(k, d, li.storage, li.beta);
    li.point_ok = li.point.alpha == li.storage && li.point.gamma == li.bandwidth;
    li.cutset_ok = li.cutset == li.payload;
    out.push_back(li);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Error-correction capability. These only need q and the layer sequences, so
// they also work for q values the field tables do not cover.

struct LayerParams {
  int q = 0;
  std::vector<int> alpha, d, k;
};

inline LayerParams msr_params(int q, const std::vector<int>& alpha) {
  LayerParams lp{q, alpha, {}, {}};
  for (int a : alpha) {
    lp.d.push_back(2 * a);
    lp.k.push_back(a + 1);
  }
  return lp;
}

inline LayerParams params_of(const CodeProfile& p) { return {p.q, p.alpha, p.d, p.k}; }

inline void check_params(const LayerParams& lp) {
  if (lp.q < 2) throw Error(ErrorKind::InvalidParams, "q must be at least 2");
  if (static_cast<int>(lp.d.size()) != lp.q || static_cast<int>(lp.k.size()) != lp.q)
    throw Error(ErrorKind::InvalidParams, "need q layer parameters");
  const int n = lp.q * lp.q;
  if (lp.d.back() > n - 1 || lp.k.back() > n) throw Error(ErrorKind::InvalidParams, "layer parameters exceed q^2");
}

// q * floor((q^2 - d_{q-1} - 1) / 2)
inline int tau_h_regen(const LayerParams& lp) {
  check_params(lp);
  return lp.q * ((lp.q * lp.q - lp.d.back() - 1) / 2);
}

// q * floor((q^2 - k_{q-1}) / 2)
inline int tau_h_recon(const LayerParams& lp) {
  check_params(lp);
  return lp.q * ((lp.q * lp.q - lp.k.back()) / 2);
}

// A single (q^3 - q, sum d_l) RS code of the same rate.
inline int tau_rs_regen(const LayerParams& lp) {
  check_params(lp);
  const int sum = std::accumulate(lp.d.begin(), lp.d.end(), 0);
  const int slack = lp.q * lp.q * lp.q - lp.q - sum;
  return slack > 0 ? slack / 2 : 0;
}

// Same-rate comparison for reconstruction: one (q^3, sum k_l) RS code.
inline int tau_rs_recon(const LayerParams& lp) {
  check_params(lp);
  const int sum = std::accumulate(lp.k.begin(), lp.k.end(), 0);
  const int slack = lp.q * lp.q * lp.q - sum;
  return slack > 0 ? slack / 2 : 0;
}

inline int tau_hmsr_regen(const CodeProfile& p) { return tau_h_regen(params_of(p)); }
inline int tau_hmsr_recon(const CodeProfile& p) { return tau_h_recon(params_of(p)); }
inline int tau_rsmsr(const CodeProfile& p) { return tau_rs_regen(params_of(p)); }

// (q^2 - 3q) / 4, the guaranteed gap tau_h - tau_rs for q > 3.
inline Rational guaranteed_gap(int q) { return Rational(q * q - 3 * q, 4); }

// ---------------------------------------------------------------------------
// Sweep

// Declared selection rule. m(q) = 2q^2 - 2q - 1 gives kappa(j) = 2q - 2 - j;
// alpha is then the greedy maximal strictly decreasing sequence with
// alpha_j <= kappa(j) and 2 alpha_0 <= q^2 - 2.
inline int sweep_m(int q) { return 2 * q * q - 2 * q - 1; }

inline int kappa_closed(int q, int m, int j) { return (m - j * (q + 1)) / q + 1; }

inline std::vector<int> sweep_alpha(int q) {
  const int m = sweep_m(q);
  std::vector<int> alpha;
  int cap = (q * q - 2) / 2;
  for (int j = 0; j < q; ++j) {
    const int a = std::min(kappa_closed(q, m, j), cap);
    if (a <= 0) throw Error(ErrorKind::InvalidParams, "sweep rule yields no valid alpha for q=" + std::to_string(q));
    alpha.push_back(a);
    cap = a - 1;
  }
  return alpha;
}

inline constexpr const char* kSweepRule =
    "m(q)=2q^2-2q-1; alpha_j=min(kappa(j), alpha_{j-1}-1) with 2*alpha_0<=q^2-2; MSR d=2*alpha";

struct CapabilityRow {
  int q = 0;
  int m = 0;
  std::vector<int> alpha, d, k;
  int tau_h = 0;
  int tau_rs = 0;
  int tau_h_recon = 0;
  int tau_rs_recon = 0;
  Rational regen_rate;  // sum d_l / (q^3 - q)
};

inline CapabilityRow capability_row(int q) {
  CapabilityRow r;
  r.q = q;
  r.m = sweep_m(q);
  r.alpha = sweep_alpha(q);
  auto lp = msr_params(q, r.alpha);
  r.d = lp.d;
  r.k = lp.k;
  r.tau_h = tau_h_regen(lp);
  r.tau_rs = tau_rs_regen(lp);
  r.tau_h_recon = tau_h_recon(lp);
  r.tau_rs_recon = tau_rs_recon(lp);
  r.regen_rate = Rational(std::accumulate(r.d.begin(), r.d.end(), 0), q * q * q - q);
  return r;
}

inline std::vector<CapabilityRow> capability_sweep(int q_from, int q_to, int step) {
  if (step <= 0 || q_from < 2 || q_to < q_from) throw Error(ErrorKind::InvalidParams, "bad q range");
  std::vector<CapabilityRow> rows;
  for (int q = q_from; q <= q_to; q += step) rows.push_back(capability_row(q));
  return rows;
}

inline std::string join_semicolon(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

// Sequences are ';'-separated inside their field so the row stays five columns.
inline std::string sweep_csv(const std::vector<CapabilityRow>& rows) {
  std::ostringstream s;
  s << "q,alphas,ds,tau_hmsr,tau_rsmsr\n";
  for (const auto& r : rows)
    s << r.q << ',' << join_semicolon(r.alpha) << ',' << join_semicolon(r.d) << ',' << r.tau_h << ',' << r.tau_rs << '\n';
  return s.str();
}

// Every strictly decreasing positive alpha with 2 alpha_0 <= q^2 - 2. Each is
// reachable for a large enough m, so these are exactly the MSR layer choices.
inline std::vector<std::vector<int>> all_msr_alphas(int q) {
  std::vector<std::vector<int>> out;
  const int top = (q * q - 2) / 2;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int max_v) -> void {
    if (static_cast<int>(cur.size()) == q) {
      out.push_back(cur);
      return;
    }
    const int remaining = q - static_cast<int>(cur.size());
    for (int v = max_v; v >= remaining; --v) {
      cur.push_back(v);
      self(self, v - 1);
      cur.pop_back();
    }
  };
  rec(rec, top);
  return out;
}

}  // namespace hrgc::capability
