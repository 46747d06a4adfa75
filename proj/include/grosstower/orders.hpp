#pragma once

// Orders in definite quaternion algebras: the maximal order (by saturation
// of the standard order at primes dividing its discriminant defect) and the
// Eichler tower R_0 > R_1 > ... cut out by lower-left congruences through
// the fixed p-adic splitting.

#include "grosstower/errors.hpp"
#include "grosstower/lattice.hpp"
#include "grosstower/numeric.hpp"
#include "grosstower/quaternion.hpp"
#include "grosstower/splitting.hpp"

#include <map>
#include <optional>
#include <vector>

namespace grosstower {

struct Order {
  QuaternionAlgebra algebra{Rat(-1), Rat(-1)};
  QuatLattice lattice;
  Int level = 1;        // N^+ p^m for tower members
  Int reduced_disc = 0; // = disc(B) * level for Eichler orders
  bool is_eichler = false;
};

inline bool lattice_is_order(const QuaternionAlgebra& B, const QuatLattice& L) {
  if (!L.contains(Quaternion::one())) return false;
  for (auto& u : L.basis_quaternions())
    for (auto& v : L.basis_quaternions())
      if (!L.contains(mul(B, u, v))) return false;
  return true;
}

// sqrt(|det(trd(b_i b_j))|), an integer for orders.
inline Rat reduced_discriminant(const QuaternionAlgebra& B, const QuatLattice& L) {
  RatMat T(4, std::vector<Rat>(4));
  auto qs = L.basis_quaternions();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) T[i][j] = trd(mul(B, qs[i], qs[j]));
  // 4x4 determinant by expansion
  auto det3 = [](const RatMat& M, int r0, int r1, int r2, int c0, int c1, int c2) {
    return M[r0][c0] * (M[r1][c1] * M[r2][c2] - M[r1][c2] * M[r2][c1]) -
           M[r0][c1] * (M[r1][c0] * M[r2][c2] - M[r1][c2] * M[r2][c0]) +
           M[r0][c2] * (M[r1][c0] * M[r2][c1] - M[r1][c1] * M[r2][c0]);
  };
  Rat d = T[0][0] * det3(T, 1, 2, 3, 1, 2, 3) - T[0][1] * det3(T, 1, 2, 3, 0, 2, 3) +
          T[0][2] * det3(T, 1, 2, 3, 0, 1, 3) - T[0][3] * det3(T, 1, 2, 3, 0, 1, 2);
  if (d < 0) d = -d;
  return rat_sqrt(d);
}

// Close L under multiplication; empty if it does not stabilize (the guard
// only trips when the seed element was not integral over the order).
inline std::optional<QuatLattice> multiplicative_closure(const QuaternionAlgebra& B,
                                                         QuatLattice L) {
  for (int it = 0; it < 16; ++it) {
    QuatLattice next = lattice_sum(L, lattice_product(B, L, L));
    if (next == L) return L;
    L = next;
  }
  return std::nullopt;
}

inline QuatLattice standard_order_lattice(const QuaternionAlgebra& B) {
  if (den(B.a) != 1 || den(B.b) != 1 || B.a >= 0 || B.b >= 0)
    throw invalid_input("standard order requires negative integers a, b");
  return QuatLattice::from_rows({Vec4{Rat(1), Rat(0), Rat(0), Rat(0)},
                                 Vec4{Rat(0), Rat(1), Rat(0), Rat(0)},
                                 Vec4{Rat(0), Rat(0), Rat(1), Rat(0)},
                                 Vec4{Rat(0), Rat(0), Rat(0), Rat(1)}});
}

// Maximal order containing Z<1,i,j,ij>: at every prime q where the reduced
// discriminant exceeds disc(B), adjoin an integral element with denominator
// q and re-close, until the discriminant is exactly disc(B).
inline QuatLattice maximal_order_lattice(const QuaternionAlgebra& B) {
  QuatLattice O = standard_order_lattice(B);
  Int target = B.discriminant();
  for (;;) {
    Rat rd = reduced_discriminant(B, O);
    if (den(rd) != 1) throw internal_error("maximal_order: non-integral discriminant");
    Int rdi = num(rd);
    if (rdi == target) return O;
    if (rdi % target != 0) throw internal_error("maximal_order: discriminant mismatch");
    bool progress = false;
    for (auto& [q, e] : factorize(rdi / target)) {
      auto qs = O.basis_quaternions();
      for (Int a0 = 0; a0 < q && !progress; ++a0)
        for (Int a1 = 0; a1 < q && !progress; ++a1)
          for (Int a2 = 0; a2 < q && !progress; ++a2)
            for (Int a3 = 0; a3 < q && !progress; ++a3) {
              if (a0 == 0 && a1 == 0 && a2 == 0 && a3 == 0) continue;
              Quaternion x = scal(Rat(1, q), add(add(scal(Rat(a0), qs[0]), scal(Rat(a1), qs[1])),
                                                add(scal(Rat(a2), qs[2]), scal(Rat(a3), qs[3]))));
              if (O.contains(x)) continue;
              if (den(trd(x)) != 1 || den(nrd(B, x)) != 1) continue;
              std::vector<Vec4> rows(O.rows().begin(), O.rows().end());
              rows.push_back(coords(x));
              auto closed = multiplicative_closure(B, QuatLattice::from_rows(rows));
              if (!closed) continue;
              Rat rd2 = reduced_discriminant(B, *closed);
              if (rd2 < rd && lattice_is_order(B, *closed)) {
                O = *closed;
                progress = true;
              }
            }
      if (progress) break;
    }
    if (!progress) throw internal_error("maximal_order: saturation stalled");
  }
}

// {x in L : sum_k xi_k f_k = 0 mod n for each congruence (f, n)}, where xi
// are the coordinates of x in the basis of L.
inline QuatLattice sublattice_from_congruences(
    const QuatLattice& L, const std::vector<std::pair<std::array<Int, 4>, Int>>& congs) {
  std::size_t r = congs.size();
  IntMat A(4 + r, std::vector<Int>(r, 0));
  for (std::size_t c = 0; c < r; ++c) {
    for (int k = 0; k < 4; ++k) A[k][c] = congs[c].first[k];
    A[4 + c][c] = congs[c].second;
  }
  IntMat K = int_kernel(A);
  std::vector<Vec4> rows;
  for (auto& kvec : K) {
    Vec4 v{Rat(0), Rat(0), Rat(0), Rat(0)};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) v[j] += Rat(kvec[i]) * L.rows()[i][j];
    rows.push_back(v);
  }
  return QuatLattice::from_rows(rows);
}

// Eichler order of level N^+ p^m inside the maximal order: lower-left entry
// of the local splitting vanishes mod l^{v_l(N^+)} at l | N^+ and mod p^m.
struct EichlerTower {
  QuaternionAlgebra algebra{Rat(-1), Rat(-1)};
  Int n_plus = 1;
  Int p = 0;
  int m_max = 0;
  int precision = 0;
  QuatLattice maximal;
  std::vector<Order> orders;             // orders[m] = R_m
  PadicSplitting split_p;                // normalized on the maximal order
  std::map<Int, PadicSplitting> split_nplus;

  const Order& level_order(int m) const {
    if (m < 0 || m > m_max) throw invalid_input("tower: level out of range");
    return orders[std::size_t(m)];
  }
};

inline EichlerTower eichler_order_tower(const QuaternionAlgebra& B, const Int& n_plus,
                                        const Int& p, int m_max, int precision = 24) {
  if (!B.definite) throw invalid_input("tower: algebra must be definite");
  if (!is_prime(p)) throw invalid_input("tower: p must be prime");
  Int disc = B.discriminant();
  if (disc % p == 0 || n_plus % p == 0) throw invalid_input("tower: p divides the level N");
  if (n_plus <= 0 || gcd_int(n_plus, disc) != 1)
    throw invalid_input("tower: N^+ must be positive and prime to N^-");
  if (precision < m_max + 16) precision = m_max + 16;

  EichlerTower T;
  T.algebra = B;
  T.n_plus = n_plus;
  T.p = p;
  T.m_max = m_max;
  T.precision = precision;
  T.maximal = maximal_order_lattice(B);
  T.split_p = PadicSplitting(B, T.maximal, p, precision);

  // R_0: impose the N^+ congruences on the maximal order
  QuatLattice R0 = T.maximal;
  for (auto& [l, e] : factorize(n_plus)) {
    PadicSplitting sp(B, T.maximal, l, e + 8);
    Int le = pow_int(l, unsigned(e));
    std::vector<std::pair<std::array<Int, 4>, Int>> congs(1);
    congs[0].second = le;
    auto qs = R0.basis_quaternions();
    for (int k = 0; k < 4; ++k) congs[0].first[k] = sp.phi(qs[k]).entry_mod(1, 0, e);
    R0 = sublattice_from_congruences(R0, congs);
    T.split_nplus.emplace(l, std::move(sp));
  }

  for (int m = 0; m <= m_max; ++m) {
    QuatLattice Rm = R0;
    if (m > 0) {
      Int pm = pow_int(p, unsigned(m));
      std::vector<std::pair<std::array<Int, 4>, Int>> congs(1);
      congs[0].second = pm;
      auto qs = R0.basis_quaternions();
      for (int k = 0; k < 4; ++k) congs[0].first[k] = T.split_p.phi(qs[k]).entry_mod(1, 0, m);
      Rm = sublattice_from_congruences(R0, congs);
    }
    Order O;
    O.algebra = B;
    O.lattice = Rm;
    O.level = n_plus * pow_int(p, unsigned(m));
    O.is_eichler = true;
    Rat rd = reduced_discriminant(B, Rm);
    if (den(rd) != 1 || num(rd) != disc * O.level)
      throw internal_error("tower: reduced discriminant of R_m is off");
    if (!lattice_is_order(B, Rm)) throw internal_error("tower: R_m not closed");
    O.reduced_disc = num(rd);
    T.orders.push_back(std::move(O));
  }
  for (int m = 1; m <= m_max; ++m) {
    if (!T.orders[m - 1].lattice.contains_lattice(T.orders[m].lattice))
      throw internal_error("tower: R_m not contained in R_{m-1}");
    if (lattice_index(T.orders[m].lattice, T.orders[m - 1].lattice) != Rat(1, p))
      throw internal_error("tower: index [R_{m-1}:R_m] != p");
  }
  return T;
}

}  // namespace grosstower
