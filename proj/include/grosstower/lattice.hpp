#pragma once

// Full-rank Z-lattices in B with exact rational coordinates. The canonical
// representative of a lattice is the (row-style) Hermite normal form of its
// basis matrix; two lattices are equal iff their HNF bases coincide.

#include "grosstower/errors.hpp"
#include "grosstower/numeric.hpp"
#include "grosstower/quaternion.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

namespace grosstower {

using IntMat = std::vector<std::vector<Int>>;
using RatMat = std::vector<std::vector<Rat>>;

inline Int floor_div(const Int& a, const Int& b) {
  Int q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

inline Int round_div(const Int& a, const Int& b) { return floor_div(2 * a + b, 2 * b); }

inline Int rat_floor(const Rat& r) { return floor_div(num(r), den(r)); }
inline Int rat_ceil(const Rat& r) { return -rat_floor(-r); }

// Largest k >= 0 with k^2 <= r (r >= 0).
inline Int rat_floor_sqrt(const Rat& r) {
  if (r < 0) throw internal_error("rat_floor_sqrt: negative");
  Int k = isqrt(num(r) / den(r));
  while (Rat((k + 1) * (k + 1)) <= r) ++k;
  while (k > 0 && Rat(k * k) > r) --k;
  return k;
}

// Row-style HNF. Returns the echelon matrix (zero rows dropped); if U is
// given, records the unimodular transform: U_out * A_in == [H; 0-rows],
// and the rows of U beyond the rank span the left kernel of A.
inline IntMat hnf_rows(IntMat A, IntMat* U = nullptr, int* rank_out = nullptr) {
  std::size_t m = A.size();
  std::size_t n = m ? A[0].size() : 0;
  if (U) {
    U->assign(m, std::vector<Int>(m, 0));
    for (std::size_t i = 0; i < m; ++i) (*U)[i][i] = 1;
  }
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    // eliminate below the pivot via gcd steps
    for (;;) {
      std::size_t best = m;
      for (std::size_t i = r; i < m; ++i)
        if (A[i][c] != 0 && (best == m || abs_int(A[i][c]) < abs_int(A[best][c]))) best = i;
      if (best == m) break;
      std::swap(A[r], A[best]);
      if (U) std::swap((*U)[r], (*U)[best]);
      bool clean = true;
      for (std::size_t i = r + 1; i < m; ++i) {
        if (A[i][c] == 0) continue;
        Int q = round_div(A[i][c], A[r][c]);
        for (std::size_t j = 0; j < n; ++j) A[i][j] -= q * A[r][j];
        if (U)
          for (std::size_t j = 0; j < m; ++j) (*U)[i][j] -= q * (*U)[r][j];
        if (A[i][c] != 0) clean = false;
      }
      if (clean) break;
    }
    if (A[r][c] == 0) continue;
    if (A[r][c] < 0) {
      for (std::size_t j = 0; j < n; ++j) A[r][j] = -A[r][j];
      if (U)
        for (std::size_t j = 0; j < m; ++j) (*U)[r][j] = -(*U)[r][j];
    }
    for (std::size_t i = 0; i < r; ++i) {
      Int q = floor_div(A[i][c], A[r][c]);
      if (q == 0) continue;
      for (std::size_t j = 0; j < n; ++j) A[i][j] -= q * A[r][j];
      if (U)
        for (std::size_t j = 0; j < m; ++j) (*U)[i][j] -= q * (*U)[r][j];
    }
    ++r;
  }
  if (rank_out) *rank_out = int(r);
  A.resize(r);
  return A;
}

// Basis of the integer (left) kernel {v : v A = 0}.
inline IntMat int_kernel(const IntMat& A) {
  IntMat U;
  int r = 0;
  hnf_rows(A, &U, &r);
  IntMat K(U.begin() + r, U.end());
  return K.empty() ? K : hnf_rows(K);
}

using Vec4 = std::array<Rat, 4>;

inline Vec4 coords(const Quaternion& q) { return {q.t, q.x, q.y, q.z}; }
inline Quaternion from_coords(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

// Full-rank lattice in B; basis rows kept in canonical HNF.
class QuatLattice {
 public:
  QuatLattice() = default;

  static QuatLattice from_rows(const std::vector<Vec4>& rows) {
    Int d = 1;
    for (auto& r : rows)
      for (auto& x : r) d = lcm_int(d, den(x));
    IntMat A(rows.size(), std::vector<Int>(4));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < 4; ++j) A[i][j] = num(rows[i][j] * d);
    IntMat H = hnf_rows(A);
    if (H.size() != 4) throw internal_error("QuatLattice: rank < 4");
    QuatLattice L;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) L.b_[i][j] = Rat(H[i][j], d);
    return L;
  }

  static QuatLattice from_quaternions(const std::vector<Quaternion>& qs) {
    std::vector<Vec4> rows;
    rows.reserve(qs.size());
    for (auto& q : qs) rows.push_back(coords(q));
    return from_rows(rows);
  }

  const std::array<Vec4, 4>& rows() const { return b_; }
  Quaternion basis(int i) const { return from_coords(b_[i]); }
  std::vector<Quaternion> basis_quaternions() const {
    return {basis(0), basis(1), basis(2), basis(3)};
  }

  bool operator==(const QuatLattice& o) const { return b_ == o.b_; }

  // det > 0 of the basis matrix (basis is upper triangular).
  Rat det() const { return b_[0][0] * b_[1][1] * b_[2][2] * b_[3][3]; }

  bool contains(const Vec4& v) const {
    // rows are upper triangular with pivot i in column i: solve front to back
    Vec4 r = v;
    for (int i = 0; i < 4; ++i) {
      Rat c = r[i] / b_[i][i];
      if (den(c) != 1) return false;
      for (int j = i; j < 4; ++j) r[j] -= c * b_[i][j];
    }
    return true;
  }
  bool contains(const Quaternion& q) const { return contains(coords(q)); }
  bool contains_lattice(const QuatLattice& o) const {
    for (int i = 0; i < 4; ++i)
      if (!contains(o.b_[i])) return false;
    return true;
  }

  // Coordinates of q in this basis (exact; q need not be a lattice point).
  Vec4 coordinates(const Quaternion& q) const {
    Vec4 v = coords(q);
    Vec4 c{};
    for (int i = 0; i < 4; ++i) {
      c[i] = v[i] / b_[i][i];
      for (int j = i; j < 4; ++j) v[j] -= c[i] * b_[i][j];
    }
    return c;
  }

 private:
  std::array<Vec4, 4> b_{};
};

inline QuatLattice lattice_sum(const QuatLattice& L, const QuatLattice& M) {
  std::vector<Vec4> rows(L.rows().begin(), L.rows().end());
  rows.insert(rows.end(), M.rows().begin(), M.rows().end());
  return QuatLattice::from_rows(rows);
}

inline QuatLattice lattice_scale(const Rat& c, const QuatLattice& L) {
  if (c == 0) throw internal_error("lattice_scale by 0");
  std::vector<Vec4> rows;
  for (auto& r : L.rows()) rows.push_back({c * r[0], c * r[1], c * r[2], c * r[3]});
  return QuatLattice::from_rows(rows);
}

inline QuatLattice lattice_conj(const QuatLattice& L) {
  std::vector<Quaternion> qs;
  for (auto& q : L.basis_quaternions()) qs.push_back(conj(q));
  return QuatLattice::from_quaternions(qs);
}

inline QuatLattice lattice_intersect(const QuatLattice& L, const QuatLattice& M) {
  Int d = 1;
  for (auto& r : L.rows())
    for (auto& x : r) d = lcm_int(d, den(x));
  for (auto& r : M.rows())
    for (auto& x : r) d = lcm_int(d, den(x));
  IntMat A(8, std::vector<Int>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      A[i][j] = num(L.rows()[i][j] * d);
      A[4 + i][j] = num(-M.rows()[i][j] * d);
    }
  IntMat K = int_kernel(A);
  if (K.size() != 4) throw internal_error("lattice_intersect: unexpected kernel rank");
  std::vector<Vec4> rows;
  for (auto& k : K) {
    Vec4 v{Rat(0), Rat(0), Rat(0), Rat(0)};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) v[j] += Rat(k[i]) * L.rows()[i][j];
    rows.push_back(v);
  }
  return QuatLattice::from_rows(rows);
}

inline QuatLattice lattice_product(const QuaternionAlgebra& B, const QuatLattice& L,
                                   const QuatLattice& M) {
  std::vector<Quaternion> prods;
  for (auto& u : L.basis_quaternions())
    for (auto& v : M.basis_quaternions()) prods.push_back(mul(B, u, v));
  return QuatLattice::from_quaternions(prods);
}

inline QuatLattice lattice_mul_left(const QuaternionAlgebra& B, const Quaternion& q,
                                    const QuatLattice& L) {
  std::vector<Quaternion> qs;
  for (auto& v : L.basis_quaternions()) qs.push_back(mul(B, q, v));
  return QuatLattice::from_quaternions(qs);
}

inline QuatLattice lattice_mul_right(const QuaternionAlgebra& B, const QuatLattice& L,
                                     const Quaternion& q) {
  std::vector<Quaternion> qs;
  for (auto& v : L.basis_quaternions()) qs.push_back(mul(B, v, q));
  return QuatLattice::from_quaternions(qs);
}

// [L : M] as a positive rational (the usual index when M is a sublattice).
inline Rat lattice_index(const QuatLattice& L, const QuatLattice& M) {
  return M.det() / L.det();
}

// {x : q_s x in L for every basis vector q_s of S} = right order when S = L.
inline QuatLattice right_order_lattice(const QuaternionAlgebra& B, const QuatLattice& L) {
  std::optional<QuatLattice> acc;
  for (auto& v : L.basis_quaternions()) {
    QuatLattice pre = lattice_mul_left(B, inverse(B, v), L);
    acc = acc ? lattice_intersect(*acc, pre) : pre;
  }
  return *acc;
}

inline QuatLattice left_order_lattice(const QuaternionAlgebra& B, const QuatLattice& L) {
  std::optional<QuatLattice> acc;
  for (auto& v : L.basis_quaternions()) {
    QuatLattice pre = lattice_mul_right(B, L, inverse(B, v));
    acc = acc ? lattice_intersect(*acc, pre) : pre;
  }
  return *acc;
}

// Gram matrix of the reduced norm form on the basis.
inline RatMat nrd_gram(const QuaternionAlgebra& B, const QuatLattice& L) {
  auto qs = L.basis_quaternions();
  RatMat G(4, std::vector<Rat>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) G[i][j] = trd(mul(B, qs[i], conj(qs[j]))) / 2;
  return G;
}

inline Rat rat_gcd(const Rat& a, const Rat& b) {
  if (a == 0) return abs_int(num(b)) == 0 ? Rat(0) : Rat(abs_int(num(b)), den(b));
  if (b == 0) return Rat(abs_int(num(a)), den(a));
  Int d = lcm_int(den(a), den(b));
  return Rat(gcd_int(num(a * d), num(b * d)), d);
}

// Positive generator of the fractional ideal of norms nrd(L) (L locally
// principal over its left order).
inline Rat nrd_content(const QuaternionAlgebra& B, const QuatLattice& L) {
  RatMat G = nrd_gram(B, L);
  Rat g = 0;
  for (int i = 0; i < 4; ++i) g = rat_gcd(g, G[i][i]);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) g = rat_gcd(g, G[i][i] + G[j][j] + 2 * G[i][j]);
  return g;
}

// ----- generic positive definite form utilities (dimension <= 4) -----

// Size-reduce + Lovasz swaps on an exact rational Gram; U accumulates the
// change of basis (rows). Termination is the usual LLL potential argument.
inline void lll_reduce_gram(RatMat& G, IntMat& U) {
  std::size_t n = G.size();
  U.assign(n, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) U[i][i] = 1;
  auto row_op = [&](std::size_t i, std::size_t l, const Int& q) {
    // b_i <- b_i - q b_l
    for (std::size_t j = 0; j < n; ++j) G[i][j] -= Rat(q) * G[l][j];
    for (std::size_t j = 0; j < n; ++j) G[j][i] -= Rat(q) * G[j][l];
    for (std::size_t j = 0; j < n; ++j) U[i][j] -= q * U[l][j];
  };
  auto swap_rows = [&](std::size_t k) {
    std::swap(U[k], U[k - 1]);
    std::swap(G[k], G[k - 1]);
    for (std::size_t j = 0; j < n; ++j) std::swap(G[j][k], G[j][k - 1]);
  };
  int guard = 0;
  for (;;) {
    if (++guard > 10000) throw internal_error("lll_reduce_gram: no convergence");
    // Gram-Schmidt data
    RatMat mu(n, std::vector<Rat>(n, Rat(0)));
    std::vector<Rat> Bs(n);
    for (std::size_t i = 0; i < n; ++i) {
      Rat s = G[i][i];
      for (std::size_t j = 0; j < i; ++j) {
        Rat m = G[i][j];
        for (std::size_t k = 0; k < j; ++k) m -= mu[i][k] * mu[j][k] * Bs[k];
        mu[i][j] = m / Bs[j];
        s -= mu[i][j] * mu[i][j] * Bs[j];
      }
      Bs[i] = s;
      if (s <= 0) throw internal_error("lll_reduce_gram: form not positive definite");
    }
    bool changed = false;
    for (std::size_t i = 1; i < n && !changed; ++i)
      for (std::size_t j = i; j-- > 0 && !changed;) {
        if (mu[i][j] > Rat(1, 2) || mu[i][j] < Rat(-1, 2)) {
          Int q = rat_floor(mu[i][j] + Rat(1, 2));  // nearest integer
          row_op(i, j, q);
          changed = true;
        }
      }
    if (changed) continue;
    bool swapped = false;
    for (std::size_t k = 1; k < n; ++k) {
      if (Bs[k] < (Rat(3, 4) - mu[k][k - 1] * mu[k][k - 1]) * Bs[k - 1]) {
        swap_rows(k);
        swapped = true;
        break;
      }
    }
    if (!swapped) return;
  }
}

// All x in Z^n with x G x^T == target (exact), target > 0. Returns each
// solution once with its negation (both signs included).
inline std::vector<std::vector<Int>> enumerate_by_norm(const RatMat& G_in, const Rat& target) {
  std::size_t n = G_in.size();
  RatMat G = G_in;
  IntMat U;
  lll_reduce_gram(G, U);
  // Cholesky: q_ii and q_ij with Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
  RatMat q = G;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      q[j][i] = q[i][j];
      q[i][j] = q[i][j] / q[i][i];
    }
    for (std::size_t k = i + 1; k < n; ++k)
      for (std::size_t l = k; l < n; ++l) q[k][l] -= q[k][i] * q[i][l];
  }
  std::vector<std::vector<Int>> out;
  std::vector<Int> x(n, 0);
  // recurse from the last coordinate down
  auto rec = [&](auto&& self, std::size_t i, const Rat& rem) -> void {
    Rat bound = rem / q[i][i];
    Rat center = 0;
    for (std::size_t j = i + 1; j < n; ++j) center += q[i][j] * Rat(x[j]);
    Rat s = Rat(rat_floor_sqrt(bound)) + 1;
    Int lo = rat_ceil(-center - s);
    Int hi = rat_floor(-center + s);
    for (Int v = lo; v <= hi; ++v) {
      Rat term = q[i][i] * (Rat(v) + center) * (Rat(v) + center);
      if (term > rem) continue;
      x[i] = v;
      if (i == 0) {
        if (term == rem) {
          bool nonzero = false;
          for (auto& c : x) nonzero |= (c != 0);
          if (nonzero) {
            // undo the LLL change of basis
            std::vector<Int> y(n, 0);
            for (std::size_t r = 0; r < n; ++r)
              for (std::size_t c2 = 0; c2 < n; ++c2) y[c2] += x[r] * U[r][c2];
            out.push_back(y);
          }
        }
      } else {
        self(self, i - 1, rem - term);
      }
    }
    x[i] = 0;
  };
  if (target > 0) rec(rec, n - 1, target);
  std::sort(out.begin(), out.end());
  return out;
}

// Lattice vectors of exact reduced norm `target`.
inline std::vector<Quaternion> lattice_vectors_of_norm(const QuaternionAlgebra& B,
                                                       const QuatLattice& L, const Rat& target) {
  RatMat G = nrd_gram(B, L);
  auto sols = enumerate_by_norm(G, target);
  std::vector<Quaternion> out;
  for (auto& s : sols) {
    Quaternion q;
    for (int i = 0; i < 4; ++i) q = add(q, scal(Rat(s[i]), L.basis(i)));
    out.push_back(q);
  }
  return out;
}

}  // namespace grosstower
