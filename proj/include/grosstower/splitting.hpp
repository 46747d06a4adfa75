#pragma once

// Splitting B_q = M_2(Q_q) at an unramified prime q, to precision q^W.
// Built from a lifted rank-1 idempotent e of O/q^W (O a maximal order): the
// left ideal O*e is free of rank 2 and left multiplication on it realizes
// phi with phi(O tensor Z_q) = M_2(Z_q) on the nose, which is the
// normalization the Eichler tower conditions assume. det(phi(x)) = nrd(x)
// and tr(phi(x)) = trd(x) are checked on a spanning set at construction.

#include "grosstower/errors.hpp"
#include "grosstower/lattice.hpp"
#include "grosstower/numeric.hpp"
#include "grosstower/quaternion.hpp"
#include "grosstower/zmodpk.hpp"

#include <array>
#include <vector>

namespace grosstower {

class PadicSplitting {
 public:
  PadicSplitting() = default;

  PadicSplitting(const QuaternionAlgebra& B, const QuatLattice& max_order, const Int& q, int W)
      : B_(B), O_(max_order), R_(q, W) {
    if (B.ramified_at(q)) throw invalid_input("padic_splitting: prime ramified in the algebra");
    for (int i = 0; i < 4; ++i) ob_[i] = O_.basis(i);
    build_structure_constants();
    build_idempotent();
    build_module_basis();
    build_images();
    self_check();
  }

  const ZModRing& ring() const { return R_; }
  const Int& prime() const { return R_.p(); }
  int precision() const { return R_.precision(); }
  const QuaternionAlgebra& algebra() const { return B_; }
  const QuatLattice& order_lattice() const { return O_; }

  // Largest q-power denominator appearing in the generator images; zero
  // because i and j lie in the maximal order, but recorded for the audit.
  int denominator_exponent() const { return 0; }

  PMat image_i() const { return phi(Quaternion{0, 1, 0, 0}); }
  PMat image_j() const { return phi(Quaternion{0, 0, 1, 0}); }

  // phi(x) for any x in B with exact rational coordinates.
  PMat phi(const Quaternion& x) const {
    Vec4 c = O_.coordinates(x);
    Int d = 1;
    for (auto& r : c) d = lcm_int(d, den(r));
    int v = (d == 1) ? 0 : v_adic(d, R_.p());
    Int dprime = d / pow_int(R_.p(), unsigned(v));
    Int unit = R_.inv(R_.reduce(dprime));
    std::array<Int, 4> acc{0, 0, 0, 0};
    for (int k = 0; k < 4; ++k) {
      Int ck = R_.reduce(num(c[k] * d));  // integer after scaling
      for (int t = 0; t < 4; ++t) acc[t] = R_.reduce(acc[t] + ck * phi_basis_[k].m[t]);
    }
    for (auto& t : acc) t = R_.mul(t, unit);
    return PMat(R_, -v, acc).normalized();
  }

  // Quaternion in O with phi ~= M mod q^k (M must be q-integral: shift >= 0).
  Quaternion phi_inverse_lift(const PMat& M) const {
    if (M.shift < 0) throw internal_error("phi_inverse_lift: matrix not integral");
    Int scale = pow_int(R_.p(), unsigned(M.shift));
    std::array<Int, 4> target;
    for (int t = 0; t < 4; ++t) target[t] = R_.mul(M.m[t], scale);
    // solve sum_k xi_k phi(o_k) = target
    std::array<Int, 4> xi{0, 0, 0, 0};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) xi[r] = R_.reduce(xi[r] + solve_inv_[r][c] * target[c]);
    Quaternion out;
    for (int k = 0; k < 4; ++k) out = add(out, scal(Rat(xi[k]), ob_[k]));
    return out;
  }

  // The lattice agreeing with L away from q whose q-part is the target
  // spanned by `gens` together with q^{w_plus} L_q. The caller guarantees
  //   q^{w_plus} L_q  <=  target  <=  q^{-w_minus} L_q;
  // (q^{w_plus} L + lifts) recovers the target at q up to q^W noise, and
  // intersecting with q^{-w_minus} L restores every other local part.
  QuatLattice replace_local_part(const QuatLattice& L, const std::vector<PMat>& gens, int w_plus,
                                 int w_minus) const {
    if (R_.precision() < w_plus + w_minus + 8)
      throw internal_error("replace_local_part: insufficient q-adic working precision");
    std::vector<Vec4> rows;
    Rat qw = Rat(pow_int(R_.p(), unsigned(w_plus)));
    for (auto& r : L.rows()) rows.push_back({qw * r[0], qw * r[1], qw * r[2], qw * r[3]});
    for (auto& g : gens) {
      PMat gn = g.normalized();
      if (gn.shift < 0) throw internal_error("replace_local_part: generator not q-integral");
      rows.push_back(coords(phi_inverse_lift(gn)));
    }
    QuatLattice candidate = QuatLattice::from_rows(rows);
    QuatLattice upper = lattice_scale(Rat(1, pow_int(R_.p(), unsigned(w_minus))), L);
    return lattice_intersect(candidate, upper);
  }

 private:
  using Vec = std::array<Int, 4>;

  void build_structure_constants() {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        Vec4 c = O_.coordinates(mul(B_, ob_[i], ob_[j]));
        for (int k = 0; k < 4; ++k) {
          if (den(c[k]) != 1) throw internal_error("splitting: order not multiplicatively closed");
          ctab_[i][j][k] = num(c[k]);
        }
      }
  }

  Vec vmul(const Vec& x, const Vec& y) const {
    Vec out{0, 0, 0, 0};
    for (int i = 0; i < 4; ++i) {
      if (x[i] == 0) continue;
      for (int j = 0; j < 4; ++j) {
        if (y[j] == 0) continue;
        Int c = R_.mul(x[i], y[j]);
        for (int k = 0; k < 4; ++k) out[k] = R_.reduce(out[k] + c * ctab_[i][j][k]);
      }
    }
    return out;
  }

  Vec coords_mod(const Quaternion& x) const {
    Vec4 c = O_.coordinates(x);
    Vec out;
    for (int k = 0; k < 4; ++k) out[k] = R_.reduce_rat(c[k]);
    return out;
  }

  Rat nrd_of_vec_exact(const std::array<Int, 4>& xi) const {
    Quaternion x;
    for (int k = 0; k < 4; ++k) x = add(x, scal(Rat(xi[k]), ob_[k]));
    return nrd(B_, x);
  }

  void build_idempotent() {
    const Int& q = R_.p();
    // rank-1 x in O/q with unit trace: then x / trd(x) is idempotent mod q
    Vec found{};
    bool ok = false;
    for (Int a0 = 0; a0 < q && !ok; ++a0)
      for (Int a1 = 0; a1 < q && !ok; ++a1)
        for (Int a2 = 0; a2 < q && !ok; ++a2)
          for (Int a3 = 0; a3 < q && !ok; ++a3) {
            if (a0 == 0 && a1 == 0 && a2 == 0 && a3 == 0) continue;
            std::array<Int, 4> xi{a0, a1, a2, a3};
            Quaternion x;
            for (int k = 0; k < 4; ++k) x = add(x, scal(Rat(xi[k]), ob_[k]));
            if (mod_pos(num(nrd(B_, x)), q) != 0) continue;
            Int t = mod_pos(num(trd(x)), q);
            if (t == 0) continue;
            Int tinv = inv_mod(t, q);
            for (int k = 0; k < 4; ++k) found[k] = mod_pos(xi[k] * tinv, q);
            ok = true;
          }
    if (!ok) throw internal_error("splitting: no split idempotent mod q (q ramified or order not maximal at q?)");
    // Hensel: e <- 3e^2 - 2e^3 doubles the precision each pass
    Vec e = found;
    for (int pass = 0; pass < 2 + R_.precision(); ++pass) {
      Vec e2 = vmul(e, e);
      Vec e3 = vmul(e2, e);
      Vec next;
      for (int k = 0; k < 4; ++k) next[k] = R_.reduce(3 * e2[k] - 2 * e3[k]);
      if (next == e) break;
      e = next;
    }
    Vec e2 = vmul(e, e);
    if (e2 != e) throw internal_error("splitting: idempotent lift failed");
    e_ = e;
  }

  // Reduce the row module spanned by {o_k * e} to two unit-pivot rows.
  void build_module_basis() {
    std::vector<Vec> rows(4);
    for (int k = 0; k < 4; ++k) {
      Vec ek{0, 0, 0, 0};
      ek[k] = 1;
      rows[k] = vmul(ek, e_);
    }
    std::vector<int> pivots;
    std::vector<Vec> basis;
    for (int step = 0; step < 2; ++step) {
      int pr = -1, pc = -1;
      for (std::size_t r = 0; r < rows.size() && pr < 0; ++r)
        for (int c = 0; c < 4; ++c)
          if (R_.is_unit(rows[r][c])) { pr = int(r); pc = c; break; }
      if (pr < 0) throw internal_error("splitting: module rank < 2");
      Vec piv = rows[pr];
      Int inv = R_.inv(piv[pc]);
      for (auto& x : piv) x = R_.mul(x, inv);
      rows.erase(rows.begin() + pr);
      for (auto& r : rows) {
        Int f = r[pc];
        if (f == 0) continue;
        for (int c = 0; c < 4; ++c) r[c] = R_.reduce(r[c] - f * piv[c]);
      }
      for (auto& b : basis) {
        Int f = b[pc];
        if (f == 0) continue;
        for (int c = 0; c < 4; ++c) b[c] = R_.reduce(b[c] - f * piv[c]);
      }
      basis.push_back(piv);
      pivots.push_back(pc);
    }
    for (auto& r : rows)
      for (auto& x : r)
        if (x != 0) throw internal_error("splitting: module rank > 2 (order not maximal at q)");
    v1_ = basis[0];
    v2_ = basis[1];
    piv1_ = pivots[0];
    piv2_ = pivots[1];
  }

  // coordinates of w in the (v1, v2) basis; exact mod q^W, checked
  std::pair<Int, Int> express(const Vec& w) const {
    Int alpha = w[piv1_], beta = w[piv2_];
    for (int c = 0; c < 4; ++c) {
      Int rem = R_.reduce(w[c] - alpha * v1_[c] - beta * v2_[c]);
      if (rem != 0) throw internal_error("splitting: vector not in module");
    }
    return {alpha, beta};
  }

  void build_images() {
    for (int k = 0; k < 4; ++k) {
      Vec ek{0, 0, 0, 0};
      ek[k] = 1;
      auto [a1, b1] = express(vmul(ek, v1_));
      auto [a2, b2] = express(vmul(ek, v2_));
      phi_basis_[k] = PMat(R_, 0, {a1, a2, b1, b2});
    }
    // invert the coefficient-solve matrix: columns are flattened phi(o_k)
    std::array<std::array<Int, 4>, 4> S;
    for (int col = 0; col < 4; ++col)
      for (int t = 0; t < 4; ++t) S[t][col] = phi_basis_[col].m[t];
    solve_inv_ = invert4x4(S);
  }

  std::array<std::array<Int, 4>, 4> invert4x4(std::array<std::array<Int, 4>, 4> A) const {
    std::array<std::array<Int, 4>, 4> I{};
    for (int i = 0; i < 4; ++i) I[i][i] = 1;
    for (int c = 0; c < 4; ++c) {
      int pr = -1;
      for (int r = c; r < 4; ++r)
        if (R_.is_unit(A[r][c])) { pr = r; break; }
      if (pr < 0) throw internal_error("splitting: generator images do not span M2");
      std::swap(A[c], A[pr]);
      std::swap(I[c], I[pr]);
      Int inv = R_.inv(A[c][c]);
      for (int j = 0; j < 4; ++j) {
        A[c][j] = R_.mul(A[c][j], inv);
        I[c][j] = R_.mul(I[c][j], inv);
      }
      for (int r = 0; r < 4; ++r) {
        if (r == c || A[r][c] == 0) continue;
        Int f = A[r][c];
        for (int j = 0; j < 4; ++j) {
          A[r][j] = R_.reduce(A[r][j] - f * A[c][j]);
          I[r][j] = R_.reduce(I[r][j] - f * I[c][j]);
        }
      }
    }
    return I;
  }

  void self_check() const {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        PMat lhs = phi(mul(B_, ob_[i], ob_[j]));
        PMat rhs = phi_basis_[i].mul(phi_basis_[j]);
        if (!lhs.congruent(rhs, R_.precision()))
          throw internal_error("splitting: homomorphism check failed");
      }
    for (int i = 0; i < 4; ++i) {
      if (R_.reduce_rat(nrd(B_, ob_[i])) != phi_basis_[i].det_int())
        throw internal_error("splitting: det != nrd");
      if (R_.reduce_rat(trd(ob_[i])) != phi_basis_[i].trace_int())
        throw internal_error("splitting: tr != trd");
    }
  }

  QuaternionAlgebra B_{Rat(-1), Rat(-1)};
  QuatLattice O_;
  ZModRing R_;
  std::array<Quaternion, 4> ob_;
  Int ctab_[4][4][4];
  Vec e_{};
  Vec v1_{}, v2_{};
  int piv1_ = 0, piv2_ = 0;
  std::array<PMat, 4> phi_basis_;
  std::array<std::array<Int, 4>, 4> solve_inv_;
};

}  // namespace grosstower
