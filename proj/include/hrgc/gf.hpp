#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hrgc/error.hpp"

namespace hrgc {

// A field element, stored as its index: the base-p digits of the index are the
// polynomial coefficients over GF(p), lowest digit = constant term.
using Symbol = std::uint8_t;

struct FieldSpec {
  int q;
  int p;
  int degree;                     // extension degree of GF(q^2) over GF(p)
  std::array<std::uint8_t, 9> modulus;  // monic, coefficients low -> high
};

// Lexicographically smallest primitive polynomials (coefficient vector read
// low -> high) for each supported q. GF(q^2) is built directly as GF(p^{2s}).
inline constexpr std::array<FieldSpec, 10> kFieldSpecs{{
    {2, 2, 2, {1, 1, 1}},
    {3, 3, 2, {2, 1, 1}},
    {4, 2, 4, {1, 0, 0, 1, 1}},
    {5, 5, 2, {2, 1, 1}},
    {7, 7, 2, {3, 1, 1}},
    {8, 2, 6, {1, 0, 0, 0, 0, 1, 1}},
    {9, 3, 4, {2, 0, 0, 1, 1}},
    {11, 11, 2, {2, 4, 1}},
    {13, 13, 2, {2, 1, 1}},
    {16, 2, 8, {1, 0, 0, 0, 1, 1, 1, 0, 1}},
}};

inline bool is_supported_q(int q) {
  for (const auto& s : kFieldSpecs)
    if (s.q == q) return true;
  return false;
}

class Field {
 public:
  explicit Field(int q) {
    const FieldSpec* spec = nullptr;
    for (const auto& s : kFieldSpecs)
      if (s.q == q) spec = &s;
    if (!spec)
      throw Error(ErrorKind::UnsupportedQ,
                  "q=" + std::to_string(q) + " must be one of 2,3,4,5,7,8,9,11,13,16");
    q_ = q;
    p_ = spec->p;
    deg_ = spec->degree;
    modulus_.assign(spec->modulus.begin(), spec->modulus.begin() + deg_ + 1);
    order_ = q * q;
    build_tables();
  }

  int q() const { return q_; }
  int order() const { return order_; }
  int characteristic() const { return p_; }
  int degree() const { return deg_; }
  std::span<const std::uint8_t> modulus() const { return modulus_; }

  Symbol phi() const { return exp_[1]; }

  Symbol add(Symbol a, Symbol b) const { return add_[idx(a, b)]; }
  Symbol sub(Symbol a, Symbol b) const { return add_[idx(a, neg_[b])]; }
  Symbol neg(Symbol a) const { return neg_[a]; }
  Symbol mul(Symbol a, Symbol b) const { return mul_[idx(a, b)]; }

  Symbol inv(Symbol a) const {
    if (a == 0) throw Error(ErrorKind::DivisionByZero, "inverse of zero");
    return inv_[a];
  }
  Symbol div(Symbol a, Symbol b) const { return mul(a, inv(b)); }

  Symbol pow(Symbol a, long long e) const {
    if (e == 0) return 1;
    if (a == 0) {
      if (e < 0) throw Error(ErrorKind::DivisionByZero, "negative power of zero");
      return 0;
    }
    const long long n = order_ - 1;
    long long r = (static_cast<long long>(log_[a]) * (e % n)) % n;
    if (r < 0) r += n;
    return exp_[static_cast<std::size_t>(r)];
  }

  // phi^e for any integer e.
  Symbol exp(long long e) const {
    const long long n = order_ - 1;
    long long r = e % n;
    if (r < 0) r += n;
    return exp_[static_cast<std::size_t>(r)];
  }

  int log(Symbol a) const {
    if (a == 0) throw Error(ErrorKind::DivisionByZero, "log of zero");
    return log_[a];
  }

  // a += b * c, the inner loop of every matrix routine.
  void axpy(Symbol& acc, Symbol b, Symbol c) const { acc = add(acc, mul(b, c)); }

  // The q solutions of y^q + y = 0, ascending index (so theta_0 = 0).
  std::vector<Symbol> trace_zero_set() const {
    std::vector<Symbol> out;
    for (int v = 0; v < order_; ++v) {
      auto y = static_cast<Symbol>(v);
      if (add(pow(y, q_), y) == 0) out.push_back(y);
    }
    return out;
  }

 private:
  std::size_t idx(Symbol a, Symbol b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(order_) + b;
  }

  std::vector<int> digits(int v) const {
    std::vector<int> d(static_cast<std::size_t>(deg_), 0);
    for (int i = 0; i < deg_; ++i) {
      d[static_cast<std::size_t>(i)] = v % p_;
      v /= p_;
    }
    return d;
  }
  int undigits(const std::vector<int>& d) const {
    int v = 0;
    for (int i = deg_ - 1; i >= 0; --i) v = v * p_ + d[static_cast<std::size_t>(i)];
    return v;
  }

  void build_tables() {
    const auto n = static_cast<std::size_t>(order_);
    add_.assign(n * n, 0);
    neg_.assign(n, 0);
    for (int a = 0; a < order_; ++a) {
      auto da = digits(a);
      std::vector<int> dn(da.size());
      for (std::size_t i = 0; i < da.size(); ++i) dn[i] = (p_ - da[i]) % p_;
      neg_[static_cast<std::size_t>(a)] = static_cast<Symbol>(undigits(dn));
      for (int b = 0; b < order_; ++b) {
        auto db = digits(b);
        std::vector<int> ds(da.size());
        for (std::size_t i = 0; i < da.size(); ++i) ds[i] = (da[i] + db[i]) % p_;
        add_[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)] =
            static_cast<Symbol>(undigits(ds));
      }
    }

    // Successive multiplication by x modulo the primitive modulus.
    exp_.assign(n - 1, 0);
    log_.assign(n, 0);
    std::vector<int> cur(static_cast<std::size_t>(deg_), 0);
    cur[0] = 1;
    for (std::size_t e = 0; e + 1 < n; ++e) {
      int v = undigits(cur);
      if (e > 0 && v == 1)
        throw Error(ErrorKind::UnsupportedQ, "built-in modulus is not primitive");
      exp_[e] = static_cast<Symbol>(v);
      log_[static_cast<std::size_t>(v)] = static_cast<int>(e);
      int top = cur[static_cast<std::size_t>(deg_ - 1)];
      for (int i = deg_ - 1; i > 0; --i) cur[static_cast<std::size_t>(i)] = cur[static_cast<std::size_t>(i - 1)];
      cur[0] = 0;
      for (int i = 0; i < deg_; ++i) {
        int c = (cur[static_cast<std::size_t>(i)] - top * modulus_[static_cast<std::size_t>(i)]) % p_;
        cur[static_cast<std::size_t>(i)] = (c + p_) % p_;
      }
    }
    if (undigits(cur) != 1)
      throw Error(ErrorKind::UnsupportedQ, "built-in modulus is not primitive");

    mul_.assign(n * n, 0);
    inv_.assign(n, 0);
    for (std::size_t a = 1; a < n; ++a) {
      for (std::size_t b = 1; b < n; ++b)
        mul_[a * n + b] = exp_[static_cast<std::size_t>(log_[a] + log_[b]) % (n - 1)];
      inv_[a] = exp_[(n - 1 - static_cast<std::size_t>(log_[a])) % (n - 1)];
    }
  }

  int q_ = 0, p_ = 0, deg_ = 0, order_ = 0;
  std::vector<std::uint8_t> modulus_;
  std::vector<Symbol> add_, mul_, neg_, inv_, exp_;
  std::vector<int> log_;
};

}  // namespace hrgc
