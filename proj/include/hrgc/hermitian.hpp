#pragma once

#include <string>
#include <vector>

#include "hrgc/error.hpp"
#include "hrgc/gf.hpp"
#include "hrgc/matrix.hpp"

namespace hrgc {

// Per-layer dimension bound max{t | tq + j(q+1) <= m} + 1.
inline int kappa(int q, int m, int j) {
  if (m < q * q - 1)
    throw Error(ErrorKind::InvalidM, "m=" + std::to_string(m) + " is below q^2-1=" + std::to_string(q * q - 1));
  if (j < 0 || j >= q) throw Error(ErrorKind::IndexOutOfRange, "layer index j");
  return (m - j * (q + 1)) / q + 1;
}

inline std::vector<int> kappa_sequence(int q, int m) {
  std::vector<int> out;
  for (int j = 0; j < q; ++j) out.push_back(kappa(q, m, j));
  return out;
}

// x-coordinate shared by node group g: 0 for g = 0, phi^{g-1} otherwise.
inline Symbol group_x_value(const Field& f, int g) {
  if (g < 0 || g >= f.order()) throw Error(ErrorKind::IndexOutOfRange, "group index");
  return g == 0 ? Symbol{0} : f.exp(g - 1);
}

struct CurvePoint {
  Symbol x = 0;
  Symbol y = 0;
  int group = 0;
  int slot = 0;
};

struct PointTable {
  int q = 0;
  std::vector<CurvePoint> points;  // ordered by (group, slot)

  const CurvePoint& at(int group, int slot) const {
    return points[static_cast<std::size_t>(group * q + slot)];
  }
};

inline PointTable enumerate_points(const Field& f) {
  const int q = f.q();
  const auto theta = f.trace_zero_set();
  PointTable t;
  t.q = q;
  t.points.reserve(static_cast<std::size_t>(q) * q * q);
  for (int g = 0; g < f.order(); ++g) {
    const Symbol x = group_x_value(f, g);
    const Symbol rhs = f.pow(x, q + 1);
    int yp = -1;
    for (int v = 0; v < f.order() && yp < 0; ++v) {
      auto y = static_cast<Symbol>(v);
      if (f.add(f.pow(y, q), y) == rhs) yp = v;
    }
    if (yp < 0) throw Error(ErrorKind::InvalidParams, "no curve point above x");
    for (int l = 0; l < q; ++l)
      t.points.push_back({x, f.add(static_cast<Symbol>(yp), theta[static_cast<std::size_t>(l)]), g, l});
  }
  return t;
}

// Coefficient blocks f_0..f_{q-1}, lowest degree first.
struct MessagePolynomial {
  std::vector<std::vector<Symbol>> blocks;
};

inline Symbol eval_poly(const Field& f, std::span<const Symbol> coeffs, Symbol x) {
  Symbol acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = f.add(f.mul(acc, x), coeffs[i]);
  return acc;
}

// Codeword of length q^3: position (g, l) holds sum_j y^j f_j(x) at point P_{g,l}.
inline std::vector<Symbol> encode_column(const Field& f, const MessagePolynomial& msg, const PointTable& pts) {
  std::vector<Symbol> out(pts.points.size(), 0);
  for (std::size_t i = 0; i < pts.points.size(); ++i) {
    const auto& p = pts.points[i];
    Symbol acc = 0;
    Symbol ypow = 1;
    for (const auto& blk : msg.blocks) {
      f.axpy(acc, ypow, eval_poly(f, blk, p.x));
      ypow = f.mul(ypow, p.y);
    }
    out[i] = acc;
  }
  return out;
}

// Row l is [1, y, ..., y^{q-1}] for point P_{g,l}.
inline Matrix node_basis_matrix(const Field& f, const PointTable& pts, int g) {
  const int q = pts.q;
  if (g < 0 || g >= q * q) throw Error(ErrorKind::IndexOutOfRange, "group index");
  Matrix b(static_cast<std::size_t>(q), static_cast<std::size_t>(q));
  for (int l = 0; l < q; ++l) {
    Symbol y = pts.at(g, l).y;
    Symbol v = 1;
    for (int c = 0; c < q; ++c) {
      b(static_cast<std::size_t>(l), static_cast<std::size_t>(c)) = v;
      v = f.mul(v, y);
    }
  }
  return b;
}

}  // namespace hrgc
