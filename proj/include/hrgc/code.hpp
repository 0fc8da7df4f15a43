#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hrgc/error.hpp"
#include "hrgc/gf.hpp"
#include "hrgc/hermitian.hpp"
#include "hrgc/matrix.hpp"
#include "hrgc/profile.hpp"

namespace hrgc {

// Everything derived from a profile that the engines need: the field, the
// curve points, the per-group bases B_g and their inverses, Phi_l and (MSR)
// Psi_l. Immutable after construction.
class Code {
 public:
  explicit Code(CodeProfile profile)
      : profile_(std::move(profile)), field_(profile_.q), points_(enumerate_points(field_)) {
    const int n = profile_.nodes();
    if (static_cast<int>(profile_.lambda.size()) != n)
      throw Error(ErrorKind::InvalidParams, "profile lambda must have q^2 entries");
    digest_ = profile_digest(profile_);
    for (int g = 0; g < n; ++g) {
      basis_.push_back(node_basis_matrix(field_, points_, g));
      auto inv = linalg::inverse(field_, basis_.back());
      if (!inv) throw Error(ErrorKind::SingularSystem, "node basis matrix is singular");
      basis_inv_.push_back(*inv);
      x_.push_back(group_x_value(field_, g));
    }
    for (int l = 0; l < profile_.q; ++l) {
      phi_.push_back(phi_matrix(field_, profile_.alpha_at(l)));
      if (profile_.mode == Mode::Msr) psi_.push_back(psi_matrix(field_, phi_.back(), profile_.lambda));
    }
  }

  const CodeProfile& profile() const { return profile_; }
  const Field& field() const { return field_; }
  const PointTable& points() const { return points_; }
  std::uint64_t digest() const { return digest_; }
  int q() const { return profile_.q; }
  int nodes() const { return profile_.nodes(); }
  Mode mode() const { return profile_.mode; }

  const Matrix& basis(int g) const { return basis_.at(static_cast<std::size_t>(g)); }
  const Matrix& basis_inv(int g) const { return basis_inv_.at(static_cast<std::size_t>(g)); }
  Symbol x(int g) const { return x_.at(static_cast<std::size_t>(g)); }
  Symbol lambda(int g) const { return profile_.lambda.at(static_cast<std::size_t>(g)); }

  const Matrix& phi(int l) const { return phi_.at(static_cast<std::size_t>(l)); }
  const Matrix& psi(int l) const {
    if (psi_.empty()) throw Error(ErrorKind::InvalidParams, "Psi is only defined for MSR profiles");
    return psi_.at(static_cast<std::size_t>(l));
  }

  // mu_{g,l}: row g of Phi_l.
  std::vector<Symbol> mu(int g, int l) const {
    auto r = phi(l).row(static_cast<std::size_t>(g));
    return {r.begin(), r.end()};
  }

  // Rows of the repair generator for layer l (Psi_l for MSR, Phi_l for MBR).
  const Matrix& repair_generator(int l) const { return profile_.mode == Mode::Msr ? psi(l) : phi(l); }

 private:
  CodeProfile profile_;
  Field field_;
  PointTable points_;
  std::uint64_t digest_ = 0;
  std::vector<Matrix> basis_, basis_inv_;
  std::vector<Symbol> x_;
  std::vector<Matrix> phi_, psi_;
};

namespace detail {
inline Matrix stacked_rows(const Matrix& m, int i, int j) {
  if (i < 0 || j < i || j >= static_cast<int>(m.rows()))
    throw Error(ErrorKind::IndexOutOfRange, "row range " + std::to_string(i) + ".." + std::to_string(j));
  return linalg::block(m, static_cast<std::size_t>(i), 0, static_cast<std::size_t>(j - i + 1), m.cols());
}
inline void check_layer(const Code& c, int l) {
  if (l < 0 || l >= c.q()) throw Error(ErrorKind::IndexOutOfRange, "layer " + std::to_string(l));
}
}  // namespace detail

// Rows i..j of Psi_l.
inline Matrix v_rows(const Code& c, int i, int j, int l) {
  detail::check_layer(c, l);
  return detail::stacked_rows(c.psi(l), i, j);
}

// Rows i..j of Phi_l.
inline Matrix w_rows(const Code& c, int i, int j, int l) {
  detail::check_layer(c, l);
  return detail::stacked_rows(c.phi(l), i, j);
}

}  // namespace hrgc
