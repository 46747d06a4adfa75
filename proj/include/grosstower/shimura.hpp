#pragma once

// The definite Shimura sets X_m (ideal classes) and X~_m (classes with
// Gamma_1(p^m)-structure) as finite sets of pairs (class index, fiber), the
// covering tower, and the Hecke/diamond operators as exact integer
// matrices. A tilde point (i, t) stands for the coset U_m tau_t gamma_i B^x
// where tau_t is the idele diag(t,1) at p; the fiber group over class i is
// (Z/p^m)^x modulo nu_i(Gamma_i), nu_i reading the upper-left entry of the
// p-adic splitting on the unit group of the i-th right order.

#include "grosstower/classset.hpp"
#include "grosstower/errors.hpp"
#include "grosstower/orders.hpp"
#include "grosstower/splitting.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace grosstower {

// Upper-left entry of a unit of the level-p^m Eichler order mod p^m.
// Requires integrality, unit determinant and lower-left entry = 0 mod p^m.
inline Int a_coordinate(const PMat& U_in, const Int& p, int m) {
  PMat U = U_in.normalized();
  if (m == 0) return 0;
  if (U.shift != 0) throw internal_error("a_coordinate: matrix is not a unit (shift)");
  if (U.ring.val(U.det_int()) != 0) throw internal_error("a_coordinate: determinant not a unit");
  if (U.entry_val(1, 0) < m) throw internal_error("a_coordinate: lower-left entry not 0 mod p^m");
  Int a = U.entry_mod(0, 0, m);
  if (a % p == 0) throw internal_error("a_coordinate: upper-left entry not a unit");
  return a;
}

struct TildePoint {
  std::size_t class_index = 0;
  Int fiber = 0;  // canonical coset representative in (Z/p^m)^x; 0 when m = 0
  bool operator==(const TildePoint& o) const = default;
  bool operator<(const TildePoint& o) const {
    if (class_index != o.class_index) return class_index < o.class_index;
    return fiber < o.fiber;
  }
};

class ShimuraLevel {
 public:
  ShimuraLevel() = default;

  ShimuraLevel(const EichlerTower& tower, int m)
      : p_(tower.p), m_(m), pm_(pow_int(tower.p, unsigned(m))), split_(tower.split_p) {
    classes_ = right_class_set(tower.algebra, tower.level_order(m), tower.p);
    // fiber subgroups nu_i(Gamma_i) and canonical coset representatives
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      std::set<Int> img;
      if (m_ == 0) {
        img.insert(0);
      } else {
        for (auto& g : classes_.unit_groups[i])
          img.insert(a_coordinate(split_.phi(g), p_, m_));
      }
      nu_images_.push_back(img);
      std::vector<Int> reps;
      if (m_ == 0) {
        reps.push_back(0);
      } else {
        std::set<Int> done;
        for (Int t = 1; t < pm_; ++t) {
          if (t % p_ == 0 || done.count(t)) continue;
          reps.push_back(t);
          for (auto& u : img) done.insert(u * t % pm_);
        }
      }
      fiber_reps_.push_back(reps);
      for (auto& t : reps) {
        point_index_[TildePoint{i, t}] = points_.size();
        points_.push_back(TildePoint{i, t});
      }
    }
  }

  const Int& p() const { return p_; }
  int m() const { return m_; }
  const Int& p_pow_m() const { return pm_; }
  const RightIdealClassSet& classes() const { return classes_; }
  const PadicSplitting& splitting() const { return split_; }
  std::size_t class_count() const { return classes_.size(); }
  std::size_t tilde_count() const { return points_.size(); }
  const std::vector<TildePoint>& points() const { return points_; }
  const std::set<Int>& nu_image(std::size_t i) const { return nu_images_[i]; }

  // size of the stabilizer Gamma~ of any point over class i (kernel of nu_i)
  Int tilde_stabilizer_order(std::size_t i) const {
    return Int(classes_.unit_groups[i].size()) / Int(nu_images_[i].size());
  }

  Int canonical_fiber(std::size_t i, const Int& t_raw) const {
    if (m_ == 0) return 0;
    Int t = mod_pos(t_raw, pm_);
    if (t % p_ == 0) throw internal_error("canonical_fiber: fiber not a unit");
    Int best = -1;
    for (auto& u : nu_images_[i]) {
      Int cand = u * t % pm_;
      if (best < 0 || cand < best) best = cand;
    }
    return best;
  }

  std::size_t index_of(std::size_t i, const Int& t_raw) const {
    auto it = point_index_.find(TildePoint{i, canonical_fiber(i, t_raw)});
    if (it == point_index_.end()) throw internal_error("index_of: unknown tilde point");
    return it->second;
  }

  std::size_t index_of(const TildePoint& P) const { return index_of(P.class_index, P.fiber); }

 private:
  Int p_ = 0;
  int m_ = 0;
  Int pm_ = 1;
  PadicSplitting split_;
  RightIdealClassSet classes_;
  std::vector<std::set<Int>> nu_images_;
  std::vector<std::vector<Int>> fiber_reps_;
  std::vector<TildePoint> points_;
  std::map<TildePoint, std::size_t> point_index_;
};

// Integer divisor on the tilde points of one level.
struct Divisor {
  int m = 0;
  std::map<std::size_t, Int> coeffs;  // point index -> coefficient

  static Divisor point(const ShimuraLevel& L, const TildePoint& P, const Int& c = 1) {
    Divisor D;
    D.m = L.m();
    D.coeffs[L.index_of(P)] = c;
    return D;
  }
  Divisor& add(std::size_t idx, const Int& c) {
    auto it = coeffs.find(idx);
    if (it == coeffs.end()) {
      if (c != 0) coeffs[idx] = c;
    } else {
      it->second += c;
      if (it->second == 0) coeffs.erase(it);
    }
    return *this;
  }
  Divisor& add_divisor(const Divisor& o) {
    if (o.m != m) throw invalid_input("Divisor: level mismatch");
    for (auto& [k, v] : o.coeffs) add(k, v);
    return *this;
  }
  Divisor scaled(const Int& c) const {
    Divisor D;
    D.m = m;
    if (c != 0)
      for (auto& [k, v] : coeffs) D.coeffs[k] = c * v;
    return D;
  }
  Int degree() const {
    Int d = 0;
    for (auto& [k, v] : coeffs) d += v;
    return d;
  }
  bool operator==(const Divisor& o) const = default;
};

struct HeckeMatrix {
  std::string op;    // "T", "U", "diamond", "Tnn"
  Int param = 0;
  int m = 0;
  std::vector<std::vector<Int>> mat;  // column j = image of point j

  Divisor apply(const ShimuraLevel& L, const Divisor& D) const {
    if (D.m != m) throw invalid_input("HeckeMatrix: level mismatch");
    Divisor out;
    out.m = m;
    for (auto& [j, c] : D.coeffs)
      for (std::size_t i = 0; i < mat.size(); ++i)
        if (mat[i][j] != 0) out.add(i, c * mat[i][j]);
    (void)L;
    return out;
  }

  std::vector<Int> column_sums() const {
    std::size_t n = mat.size();
    std::vector<Int> s(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s[j] += mat[i][j];
    return s;
  }
};

inline std::vector<std::vector<Int>> mat_mul(const std::vector<std::vector<Int>>& A,
                                             const std::vector<std::vector<Int>>& B) {
  std::size_t n = A.size();
  std::vector<std::vector<Int>> C(n, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (A[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) C[i][j] += A[i][k] * B[k][j];
    }
  return C;
}

// T_l for l coprime to N p^m: translate every class by the l+1 neighbor
// ideals, classify, and push the fiber through the recovered unit, whose
// p-component is phi_p(b)^{-1}.
inline HeckeMatrix hecke_T(const ShimuraLevel& L, const Int& ell) {
  const auto& cls = L.classes();
  const QuaternionAlgebra& B = cls.algebra;
  if (B.discriminant() % ell == 0 || cls.order.level % ell == 0)
    throw invalid_input("hecke_T: l must be coprime to N p^m");
  HeckeMatrix H;
  H.op = "T";
  H.param = ell;
  H.m = L.m();
  std::size_t n = L.tilde_count();
  H.mat.assign(n, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < cls.size(); ++i) {
    // neighbors and their fiber multipliers, once per class
    std::vector<std::pair<std::size_t, Int>> images;
    for (auto& nb : ell_neighbors(B, cls.order.lattice, cls.reps[i], ell)) {
      auto [i2, b] = classify_right_ideal(cls, nb);
      Int mult = 1;
      if (L.m() > 0) mult = a_coordinate(L.splitting().phi(b).inverse(), L.p(), L.m());
      images.emplace_back(i2, mult);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const TildePoint& P = L.points()[j];
      if (P.class_index != i) continue;
      for (auto& [i2, mult] : images) {
        Int t2 = (L.m() == 0) ? Int(0) : P.fiber * mult;
        H.mat[L.index_of(i2, t2)][j] += 1;
      }
    }
  }
  return H;
}

// U_p for m >= 1. The translate pi_a tau_t gamma_i has p-part
// [[t, a],[0, p]]; its ideal is cut out of I_i by beta = a t^{-1} alpha and
// delta = 0 mod p on phi_p(x) = [[alpha, beta],[gamma, delta]].
inline HeckeMatrix hecke_U(const ShimuraLevel& L) {
  if (L.m() < 1) throw invalid_input("hecke_U: requires m >= 1");
  const auto& cls = L.classes();
  const Int& p = L.p();
  HeckeMatrix H;
  H.op = "U";
  H.param = p;
  H.m = L.m();
  std::size_t n = L.tilde_count();
  H.mat.assign(n, std::vector<Int>(n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    const TildePoint& P = L.points()[j];
    const QuatLattice& I = cls.reps[P.class_index];
    auto ib = I.basis_quaternions();
    Int tinv = inv_mod(P.fiber, p);
    for (Int a = 0; a < p; ++a) {
      std::vector<std::pair<std::array<Int, 4>, Int>> congs(2);
      congs[0].second = p;
      congs[1].second = p;
      for (int s = 0; s < 4; ++s) {
        PMat M = L.splitting().phi(ib[s]);
        Int alpha = M.entry_mod(0, 0, 1), beta = M.entry_mod(0, 1, 1), delta = M.entry_mod(1, 1, 1);
        congs[0].first[s] = mod_pos(beta - a * tinv * alpha, p);
        congs[1].first[s] = delta;
      }
      QuatLattice J = sublattice_from_congruences(I, congs);
      if (lattice_index(I, J) != Rat(p * p)) throw internal_error("hecke_U: translate index != p^2");
      auto [i2, b] = classify_right_ideal(cls, J);
      PMat g(L.splitting().ring(), 0, {P.fiber, a, 0, p});
      PMat u = g.mul(L.splitting().phi(b).inverse());
      Int t2 = a_coordinate(u, p, L.m());
      H.mat[L.index_of(i2, t2)][j] += 1;
    }
  }
  return H;
}

// Diamond operator <d>: (i, t) -> (i, d^{-1} t). The inverse is forced by
// the normalization T(n,n) = <n>: the T(n,n) translate of tau_t gamma_i is
// the scaled ideal n I_i with generator b = n, whose recovered unit has
// p-component n^{-1}.
inline HeckeMatrix hecke_diamond(const ShimuraLevel& L, const Int& d) {
  if (gcd_int(mod_pos(d, L.p()), L.p()) != 1 || mod_pos(d, L.p()) == 0)
    throw invalid_input("hecke_diamond: d must be prime to p");
  HeckeMatrix H;
  H.op = "diamond";
  H.param = mod_pos(d, L.p_pow_m() == 1 ? Int(1) : L.p_pow_m());
  H.m = L.m();
  std::size_t n = L.tilde_count();
  H.mat.assign(n, std::vector<Int>(n, 0));
  Int dinv = (L.m() == 0) ? Int(1) : inv_mod(d, L.p_pow_m());
  for (std::size_t j = 0; j < n; ++j) {
    const TildePoint& P = L.points()[j];
    Int t2 = (L.m() == 0) ? Int(0) : P.fiber * dinv;
    H.mat[L.index_of(P.class_index, t2)][j] += 1;
  }
  return H;
}

// T(n,n) for n prime to N p, computed through the classification kernel as
// an independent route (the two-sided translate by the idele n at n).
inline HeckeMatrix hecke_Tnn(const ShimuraLevel& L, const Int& nparam) {
  const auto& cls = L.classes();
  if (gcd_int(nparam, cls.algebra.discriminant() * cls.order.level * L.p()) != 1)
    throw invalid_input("hecke_Tnn: n must be coprime to N p");
  HeckeMatrix H;
  H.op = "Tnn";
  H.param = nparam;
  H.m = L.m();
  std::size_t n = L.tilde_count();
  H.mat.assign(n, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < cls.size(); ++i) {
    QuatLattice J = lattice_scale(Rat(nparam), cls.reps[i]);
    auto [i2, b] = classify_right_ideal(cls, J);
    Int mult = 1;
    if (L.m() > 0) mult = a_coordinate(L.splitting().phi(b).inverse(), L.p(), L.m());
    for (std::size_t j = 0; j < n; ++j) {
      const TildePoint& P = L.points()[j];
      if (P.class_index != i) continue;
      Int t2 = (L.m() == 0) ? Int(0) : P.fiber * mult;
      H.mat[L.index_of(i2, t2)][j] += 1;
    }
  }
  return H;
}

// Covering pushforward Div(X~_m) -> Div(X~_{m-1}): the level-(m-1) ideal of
// tau_t gamma_i is R_{m-1} * I_i, classified at the lower level.
inline Divisor pushforward(const ShimuraLevel& Lm, const ShimuraLevel& Lm1, const Divisor& D) {
  if (Lm1.m() + 1 != Lm.m() || D.m != Lm.m()) throw invalid_input("pushforward: level mismatch");
  const QuaternionAlgebra& B = Lm.classes().algebra;
  Divisor out;
  out.m = Lm1.m();
  for (auto& [j, c] : D.coeffs) {
    const TildePoint& P = Lm.points()[j];
    QuatLattice J = lattice_product(B, Lm1.classes().order.lattice, Lm.classes().reps[P.class_index]);
    auto [i2, b] = classify_right_ideal(Lm1.classes(), J);
    Int t2 = 0;
    if (Lm1.m() > 0) {
      Int mult = a_coordinate(Lm1.splitting().phi(b).inverse(), Lm1.p(), Lm1.m());
      t2 = P.fiber * mult;
    }
    out.add(Lm1.index_of(i2, t2), c);
  }
  return out;
}

}  // namespace grosstower
