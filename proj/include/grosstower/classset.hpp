#pragma once

// Right ideal class sets of Eichler orders in definite algebras, computed
// by breadth-first l-neighbor expansion at the smallest admissible prime
// and certified complete against the Eichler mass. Class representatives
// are left R-ideals supported only at the expansion prime, so their local
// components at p (and at every other prime) are trivial; downstream fiber
// tracking relies on that normalization.

#include "grosstower/errors.hpp"
#include "grosstower/lattice.hpp"
#include "grosstower/mass_formula.hpp"
#include "grosstower/numeric.hpp"
#include "grosstower/orders.hpp"
#include "grosstower/quaternion.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <vector>

namespace grosstower {

// The l+1 left-R-stable index-l^2 sublattices between l*I and I (the Hecke
// translates of I at l); requires l coprime to disc * level.
inline std::vector<QuatLattice> ell_neighbors(const QuaternionAlgebra& B,
                                              const QuatLattice& order_lattice,
                                              const QuatLattice& I, const Int& ell) {
  // left multiplication by the order basis acting on I / l I
  std::array<std::array<std::array<Int, 4>, 4>, 4> act;  // act[k][s] = coords of r_k * b_s
  auto rb = order_lattice.basis_quaternions();
  auto ib = I.basis_quaternions();
  for (int k = 0; k < 4; ++k)
    for (int s = 0; s < 4; ++s) {
      Vec4 c = I.coordinates(mul(B, rb[k], ib[s]));
      for (int t = 0; t < 4; ++t) {
        if (v_adic(den(c[t]), ell) != 0) throw internal_error("ell_neighbors: I not R-stable at l");
        act[k][s][t] = mod_pos(num(c[t]) * inv_mod(den(c[t]), ell), ell);
      }
    }
  auto apply = [&](int k, const std::array<Int, 4>& v) {
    std::array<Int, 4> out{0, 0, 0, 0};
    for (int s = 0; s < 4; ++s) {
      if (v[s] == 0) continue;
      for (int t = 0; t < 4; ++t) out[t] = mod_pos(out[t] + v[s] * act[k][s][t], ell);
    }
    return out;
  };
  // canonical reduced row echelon form over F_l
  auto rref = [&](std::vector<std::array<Int, 4>> rows) {
    std::size_t rk = 0;
    for (int c = 0; c < 4 && rk < rows.size(); ++c) {
      std::size_t pr = rows.size();
      for (std::size_t r = rk; r < rows.size(); ++r)
        if (rows[r][c] != 0) { pr = r; break; }
      if (pr == rows.size()) continue;
      std::swap(rows[rk], rows[pr]);
      Int inv = inv_mod(rows[rk][c], ell);
      for (int t = 0; t < 4; ++t) rows[rk][t] = mod_pos(rows[rk][t] * inv, ell);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == rk || rows[r][c] == 0) continue;
        Int f = rows[r][c];
        for (int t = 0; t < 4; ++t) rows[r][t] = mod_pos(rows[r][t] - f * rows[rk][t], ell);
      }
      ++rk;
    }
    rows.resize(rk);
    return rows;
  };

  // canonical basis of the left submodule generated by a seed vector
  auto closure = [&](const std::array<Int, 4>& seed) {
    std::vector<std::array<Int, 4>> basis = rref({seed});
    for (;;) {
      std::vector<std::array<Int, 4>> grown = basis;
      for (auto& b : basis)
        for (int k = 0; k < 4; ++k) grown.push_back(apply(k, b));
      grown = rref(grown);
      if (grown == basis) return basis;
      basis = grown;
    }
  };

  std::set<std::vector<std::vector<Int>>> seen;
  std::vector<QuatLattice> out;
  // enumerate projective seeds (first nonzero coordinate normalized to 1)
  std::array<Int, 4> v{};
  for (Int a0 = 0; a0 < ell; ++a0)
    for (Int a1 = 0; a1 < ell; ++a1)
      for (Int a2 = 0; a2 < ell; ++a2)
        for (Int a3 = 0; a3 < ell; ++a3) {
          v = {a0, a1, a2, a3};
          int lead = -1;
          for (int t = 0; t < 4; ++t)
            if (v[t] != 0) { lead = t; break; }
          if (lead < 0 || v[lead] != 1) continue;
          auto basis = closure(v);
          if (basis.size() != 2) continue;
          std::vector<std::vector<Int>> key;
          for (auto& b : basis) key.push_back({b[0], b[1], b[2], b[3]});
          if (!seen.insert(key).second) continue;
          std::vector<Vec4> rows;
          for (auto& r : I.rows())
            rows.push_back({Rat(ell) * r[0], Rat(ell) * r[1], Rat(ell) * r[2], Rat(ell) * r[3]});
          for (auto& b : basis) {
            Vec4 w{Rat(0), Rat(0), Rat(0), Rat(0)};
            for (int s = 0; s < 4; ++s)
              for (int t = 0; t < 4; ++t) w[t] += Rat(b[s]) * I.rows()[s][t];
            rows.push_back(w);
          }
          out.push_back(QuatLattice::from_rows(rows));
        }
  if (Int(out.size()) != ell + 1) throw internal_error("ell_neighbors: expected l+1 neighbors");
  std::sort(out.begin(), out.end(), [](const QuatLattice& A, const QuatLattice& Bq) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (A.rows()[i][j] != Bq.rows()[i][j]) return A.rows()[i][j] < Bq.rows()[i][j];
      }
    return false;
  });
  return out;
}

// I^{-1} = conj(I) / nrd(I).
inline QuatLattice ideal_inverse(const QuaternionAlgebra& B, const QuatLattice& I) {
  return lattice_scale(Rat(1) / nrd_content(B, I), lattice_conj(I));
}

struct RightIdealClassSet {
  QuaternionAlgebra algebra{Rat(-1), Rat(-1)};
  Order order;
  Int bfs_prime = 0;
  std::vector<QuatLattice> reps;          // I_1 = R, ...
  std::vector<QuatLattice> rep_inverses;  // I_i^{-1}
  std::vector<QuatLattice> right_orders;  // R_i = O_r(I_i)
  std::vector<std::vector<Quaternion>> unit_groups;  // norm-1 units of R_i
  Rat mass{0};

  std::size_t size() const { return reps.size(); }
};

// Principal test for a left ideal L over its left order: in a definite
// algebra L = O b iff L contains an element of norm nrd(L). Returns the
// first generator in the deterministic enumeration order.
inline std::optional<Quaternion> principal_generator(const QuaternionAlgebra& B,
                                                     const QuatLattice& L) {
  Rat n = nrd_content(B, L);
  auto vs = lattice_vectors_of_norm(B, L, n);
  if (vs.empty()) return std::nullopt;
  return vs.front();
}

// (class index, b) with J = I_i * b; J must be a left ideal of the order.
inline std::pair<std::size_t, Quaternion> classify_right_ideal(const RightIdealClassSet& cls,
                                                               const QuatLattice& J) {
  const QuaternionAlgebra& B = cls.algebra;
  for (std::size_t i = 0; i < cls.reps.size(); ++i) {
    QuatLattice L = lattice_product(B, cls.rep_inverses[i], J);
    auto g = principal_generator(B, L);
    if (!g) continue;
    if (!(lattice_mul_right(B, cls.reps[i], *g) == J))
      throw internal_error("classify_right_ideal: generator does not transport the ideal");
    return {i, *g};
  }
  throw internal_error("classify_right_ideal: no class matches (class set incomplete?)");
}

inline Int admissible_bfs_prime(const Int& n_minus, const Int& level, const Int& p) {
  for (Int l = 2;; ++l) {
    if (!is_prime(l)) continue;
    if (n_minus % l == 0 || level % l == 0 || l == p) continue;
    return l;
  }
}

// Breadth-first neighbor enumeration; completeness certified by the mass
// formula (computed in mass_formula.hpp, a separate unit on purpose).
inline RightIdealClassSet right_class_set(const QuaternionAlgebra& B, const Order& order,
                                          const Int& p_to_avoid) {
  if (!B.definite) throw invalid_input("right_class_set: algebra must be definite");
  RightIdealClassSet cls;
  cls.algebra = B;
  cls.order = order;
  cls.bfs_prime = admissible_bfs_prime(B.discriminant(), order.level, p_to_avoid);

  cls.reps.push_back(order.lattice);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t idx = queue.front();
    queue.pop_front();
    for (auto& nb : ell_neighbors(B, order.lattice, cls.reps[idx], cls.bfs_prime)) {
      bool known = false;
      for (auto& rep : cls.reps) {
        QuatLattice L = lattice_product(B, ideal_inverse(B, rep), nb);
        if (principal_generator(B, L)) { known = true; break; }
      }
      if (!known) {
        cls.reps.push_back(nb);
        queue.push_back(cls.reps.size() - 1);
      }
    }
  }

  Rat mass_sum = 0;
  for (auto& rep : cls.reps) {
    cls.rep_inverses.push_back(ideal_inverse(B, rep));
    QuatLattice Ri = right_order_lattice(B, rep);
    auto units = lattice_vectors_of_norm(B, Ri, 1);
    mass_sum += Rat(2, Int(units.size()));
    cls.right_orders.push_back(std::move(Ri));
    cls.unit_groups.push_back(std::move(units));
  }
  cls.mass = eichler_mass(B.discriminant(), order.level);
  if (mass_sum != cls.mass)
    throw internal_error("right_class_set: mass check failed: enumeration incomplete or wrong");
  return cls;
}

}  // namespace grosstower
