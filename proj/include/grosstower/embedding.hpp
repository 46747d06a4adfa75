#pragma once

// Optimal embeddings K -> B. A global seed g sends sqrt(-D) to a trace-zero
// quaternion of norm D; at each bad prime a Skolem-Noether conjugator moves
// g into a standard local model:
//   - at p, the inert/split matrix families psi_p^{(c)} (conjugated along
//     the tower by powers of pi_p = diag(1, p)),
//   - at an auxiliary inert l, the same inert display (the conductor-l
//     member is then the pi_l-conjugate, giving the T_l compatibility),
//   - at l | N^+, a lower-triangular model landing in the Eichler order,
//   - elsewhere (l | 2 D_K c), the companion matrix of a generator of the
//     local order, optimal into M_2(Z_l) in every case.
// verify_optimal is the independent check: it recovers f^{-1}(O) as an
// exact lattice in K and compares it with O_c.

#include "grosstower/cmfield.hpp"
#include "grosstower/errors.hpp"
#include "grosstower/lattice.hpp"
#include "grosstower/orders.hpp"
#include "grosstower/splitting.hpp"

#include <optional>
#include <vector>

namespace grosstower {

// omega with trd = 0 and nrd = D, by the fixed deterministic search:
// i or j shortcuts when D = -a or D = -b, else coordinates in the (i, j, ij)
// frame by increasing denominator, then box radius, then lexicographic
// order with values ordered 0, 1, -1, 2, -2, ...
inline Quaternion global_embedding_seed(const QuaternionAlgebra& B, const ImagQuadField& K) {
  for (auto& l : prime_divisors(B.discriminant())) {
    if (kronecker(K.D_K, l) == 1)
      throw invalid_input("global_embedding_seed: K does not embed, prime " + l.str() +
                          " of N^- splits in K");
  }
  const Int& D = K.D;
  if (B.a == Rat(-D)) return Quaternion{0, 1, 0, 0};
  if (B.b == Rat(-D)) return Quaternion{0, 0, 1, 0};
  Int A = -num(B.a), Bc = -num(B.b);  // positive
  for (Int d = 1; d <= 16; ++d) {
    Int target = D * d * d;
    Int r = isqrt(target) + 1;
    std::vector<Int> vals{0};
    for (Int v = 1; v <= r; ++v) {
      vals.push_back(v);
      vals.push_back(-v);
    }
    for (auto& x : vals)
      for (auto& y : vals)
        for (auto& z : vals) {
          if (A * x * x + Bc * y * y + A * Bc * z * z == target) {
            if (d > 1 && gcd_int(gcd_int(x, y), gcd_int(z, d)) != 1) continue;
            return Quaternion{0, Rat(x, d), Rat(y, d), Rat(z, d)};
          }
        }
  }
  throw internal_error("global_embedding_seed: bounded search exhausted");
}

// ---- local matrix models (images of sqrt(-D)) ----

// p inert in K, p^h || c:  [[0, -D p^h],[p^{-h}, 0]]
inline PMat model_inert(const ZModRing& R, const Int& D, int h) {
  Int ph = pow_int(R.p(), unsigned(h));
  return PMat(R, -h, {Int(0), R.reduce(-D * ph * ph), Int(1), Int(0)}).normalized();
}

// p split in K, p^h || c:  sqrt(-D) -> (s, -s) -> [[s, 0],[2 s p^{-h}, -s]]
inline PMat model_split(const ZModRing& R, const Int& D, int h) {
  auto s = R.sqrt_unit(R.reduce(-D));
  if (!s) throw internal_error("model_split: -D is not a square at the split prime");
  Int ph = pow_int(R.p(), unsigned(h));
  return PMat(R, -h, {R.mul(*s, ph), Int(0), R.mul(2, *s), R.reduce(-*s * ph)}).normalized();
}

// companion model at l with l^v || c: the image of sqrt(-D) derived from
// the companion matrix of the minimal polynomial of l^v theta, theta the
// standard generator of O_K. Optimal into M_2(Z_l) for split, inert and
// ramified l alike.
inline PMat model_companion(const ZModRing& R, const ImagQuadField& K, int v) {
  Int lv = pow_int(R.p(), unsigned(v));
  if (mod_pos(K.D_K, 2) == 1) {
    // theta = (D_K + sqrt(D_K))/2, minpoly of l^v theta: x^2 - D_K l^v x + (D_K^2-D_K)/4 l^{2v};
    // sqrt(-D) = sqrt(D_K) = (2 theta l^v - D_K l^v)/l^v
    Int t0 = K.D_K * lv;
    Int n0 = (K.D_K * K.D_K - K.D_K) / 4 * lv * lv;
    PMat M(R, 0, {Int(0), R.reduce(-n0), Int(1), R.reduce(t0)});
    PMat X = M.scale_int(2).add(PMat::diag(R, R.reduce(-t0), R.reduce(-t0)));
    return X.scale_ppow(-v).normalized();
  }
  // O_K = Z[sqrt(-D)]: companion of x^2 + D l^{2v}
  PMat M(R, 0, {Int(0), R.reduce(-K.D * lv * lv), Int(1), Int(0)});
  return M.scale_ppow(-v).normalized();
}

// l | N^+ (split in K): sqrt(-D) -> [[s, 0],[2 s l^v, -s]], optimal into
// the level-l^v Eichler order.
inline PMat model_eichler_split(const ZModRing& R, const ImagQuadField& K, int v) {
  if (R.p() == 2) throw invalid_input("even N^+ is not supported");
  auto s = R.sqrt_unit(R.reduce(-K.D));
  if (!s) throw internal_error("model_eichler_split: prime of N^+ not split in K");
  Int lv = pow_int(R.p(), unsigned(v));
  return PMat(R, 0, {*s, Int(0), R.mul(R.mul(2, *s), lv), R.reduce(-*s)});
}

// Solve A W = X A for A with minimal determinant valuation, scanning small
// combinations of the solution-module generators deterministically.
inline PMat skolem_noether_conjugator(const ZModRing& R, const PMat& W_in, const PMat& X_in) {
  PMat W = W_in.normalized(), X = X_in.normalized();
  if (W.shift != X.shift)
    throw internal_error("skolem_noether: valuation mismatch between conjugates");
  const Int qW = R.modulus();
  const Int& q = R.p();
  IntMat C(8, std::vector<Int>(4, 0));
  auto idx = [](int i, int j) { return 2 * i + j; };
  // entry (i,j) of A W - X A as a linear form in vec(A)
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      int col = idx(i, j);
      for (int k = 0; k < 2; ++k) {
        C[idx(i, k)][col] += W.m[idx(k, j)];
        C[idx(k, j)][col] -= X.m[idx(i, k)];
      }
    }
  for (int r = 0; r < 4; ++r) C[4 + r][r] = qW;
  IntMat Ker = int_kernel(C);
  std::vector<std::array<Int, 4>> gens;
  for (auto& k : Ker) {
    std::array<Int, 4> g;
    bool nz = false;
    int minval = R.precision();
    for (int t = 0; t < 4; ++t) {
      g[t] = mod_pos(k[t], qW);
      if (g[t] != 0) minval = std::min(minval, R.val(g[t]));
      nz |= (g[t] != 0);
    }
    if (!nz || minval >= R.precision() - 2) continue;
    Int pv = pow_int(q, unsigned(minval));
    for (auto& t : g) t = t / pv;  // normalize out the common q-power
    gens.push_back(g);
  }
  int best_val = R.precision();
  std::array<Int, 4> best{};
  auto consider = [&](const std::array<Int, 4>& acc) {
    Int det = mod_pos(acc[0] * acc[3] - acc[1] * acc[2], qW);
    int v = (det == 0) ? R.precision() : R.val(det);
    if (v < best_val) {
      best_val = v;
      best = acc;
    }
  };
  std::size_t gn = gens.size();
  for (std::size_t a = 0; a < gn && best_val > 0; ++a) consider(gens[a]);
  for (std::size_t a = 0; a < gn && best_val > 0; ++a)
    for (std::size_t b = a + 1; b < gn && best_val > 0; ++b)
      for (Int c = 1; c < q && best_val > 0; ++c) {
        std::array<Int, 4> acc;
        for (int t = 0; t < 4; ++t) acc[t] = mod_pos(gens[a][t] + c * gens[b][t], qW);
        consider(acc);
      }
  for (std::size_t a = 0; a < gn && best_val > 1; ++a)
    for (std::size_t b = a + 1; b < gn && best_val > 1; ++b)
      for (std::size_t e = b + 1; e < gn && best_val > 1; ++e)
        for (Int c1 = 1; c1 < q && best_val > 1; ++c1)
          for (Int c2 = 1; c2 < q && best_val > 1; ++c2) {
            std::array<Int, 4> acc;
            for (int t = 0; t < 4; ++t)
              acc[t] = mod_pos(gens[a][t] + c1 * gens[b][t] + c2 * gens[e][t], qW);
            consider(acc);
          }
  if (best_val > 2) throw internal_error("skolem_noether: no near-unit conjugator found");
  PMat A(R, 0, best);
  int check_prec = R.precision() - best_val - std::max(0, -W.shift) - 2;
  if (!A.mul(W).congruent(X.mul(A), check_prec))
    throw internal_error("skolem_noether: verification failed");
  return A;
}

// f^{-1}(O) as an exact 2-dim HNF lattice in (s, t) coordinates, s + t sqrt(-D).
inline std::array<std::array<Rat, 2>, 2> embedding_pullback(const QuaternionAlgebra& B,
                                                            const Quaternion& omega_f,
                                                            const QuatLattice& O) {
  (void)B;
  Vec4 r0 = coords(Quaternion::one());
  Vec4 r1 = coords(omega_f);
  Int d = 2;  // orders of K live in (1/2)Z^2 in these coordinates
  for (auto& x : r1) d = lcm_int(d, den(x));
  for (auto& row : O.rows())
    for (auto& x : row) d = lcm_int(d, den(x));
  d *= 2;
  IntMat A(6, std::vector<Int>(4, 0));
  for (int j = 0; j < 4; ++j) {
    A[0][j] = num(r0[j] * d / 2);
    A[1][j] = num(r1[j] * d / 2);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A[2 + i][j] = -num(O.rows()[i][j] * d);
  IntMat K = int_kernel(A);
  IntMat P;
  for (auto& k : K) P.push_back({k[0], k[1]});
  IntMat H = hnf_rows(P);
  if (H.size() != 2) throw internal_error("embedding_pullback: rank != 2");
  return {{{Rat(H[0][0], 2), Rat(H[0][1], 2)}, {Rat(H[1][0], 2), Rat(H[1][1], 2)}}};
}

// lattice of O_c in (s, t) coordinates
inline std::array<std::array<Rat, 2>, 2> order_lattice_st(const ImagQuadField& K, const Int& c) {
  if (mod_pos(K.D_K, 2) == 1)  // O_K = Z[(1 + sqrt(-D))/2]
    return {{{Rat(1), Rat(0)}, {Rat(c, 2), Rat(c, 2)}}};
  return {{{Rat(1), Rat(0)}, {Rat(0), Rat(c)}}};
}

namespace detail2x2 {
inline std::array<std::array<Rat, 2>, 2> canon(std::array<std::array<Rat, 2>, 2> L) {
  Int d = 1;
  for (auto& r : L)
    for (auto& x : r) d = lcm_int(d, den(x));
  IntMat A(2, std::vector<Int>(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) A[i][j] = num(L[i][j] * d);
  IntMat H = hnf_rows(A);
  std::array<std::array<Rat, 2>, 2> out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = Rat(H[i][j], d);
  return out;
}
inline Rat det2(const std::array<std::array<Rat, 2>, 2>& M) {
  return M[0][0] * M[1][1] - M[0][1] * M[1][0];
}
// both lattices have the same localization at q
inline bool locally_equal(const std::array<std::array<Rat, 2>, 2>& A,
                          const std::array<std::array<Rat, 2>, 2>& Bm, const Int& q) {
  Int d = 1;
  for (auto& r : A)
    for (auto& x : r) d = lcm_int(d, den(x));
  for (auto& r : Bm)
    for (auto& x : r) d = lcm_int(d, den(x));
  IntMat S(4, std::vector<Int>(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      S[i][j] = num(A[i][j] * d);
      S[2 + i][j] = num(Bm[i][j] * d);
    }
  IntMat H = hnf_rows(S);
  Rat sum_det(H[0][0] * H[1][1], d * d);
  return v_adic(det2(A) / sum_det, q) == 0 && v_adic(det2(Bm) / sum_det, q) == 0;
}
}  // namespace detail2x2

struct OptimalityReport {
  bool optimal = false;
  Int certified_conductor = 0;  // conductor of f^{-1}(O) when it is an order
  std::vector<std::pair<Int, bool>> per_prime;  // local agreement at audited primes
};

// Exact global optimality check of f (given by omega_f = f(sqrt(-D))) into
// the order with lattice O at conductor n.
inline OptimalityReport verify_optimal(const QuaternionAlgebra& B, const ImagQuadField& K,
                                       const Quaternion& omega_f, const QuatLattice& O,
                                       const Int& n) {
  OptimalityReport rep;
  auto Lp = detail2x2::canon(embedding_pullback(B, omega_f, O));
  auto Lt = detail2x2::canon(order_lattice_st(K, n));
  rep.optimal = (Lp == Lt);
  Rat idx = detail2x2::det2(Lp) / detail2x2::det2(detail2x2::canon(order_lattice_st(K, 1)));
  if (den(idx) == 1) rep.certified_conductor = num(idx);
  std::set<Int> audit{2};
  for (auto& q : prime_divisors(K.D_K)) audit.insert(abs_int(q));
  for (auto& q : prime_divisors(2 * n)) audit.insert(q);
  for (auto& q : prime_divisors(B.discriminant())) audit.insert(q);
  for (auto& q : audit)
    rep.per_prime.emplace_back(q, detail2x2::locally_equal(Lp, Lt, q));
  return rep;
}

}  // namespace grosstower
