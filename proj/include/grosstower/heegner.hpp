#pragma once

// Compatible families of Heegner points on the tower of definite Shimura
// sets. A point is held as an adelic coordinate (a finitely supported map
// of local 2x2 matrices together with a global right factor b^{-1}),
// classified through strong approximation into (class index, fiber, b).
// The family seeds the local data exactly as the conductor recursions
// demand: a_p^{(c,m)} = pi_p^{m + v_p(c)} a_p, a_l^{(cl, m)} = pi_l a_l at
// the auxiliary inert prime, everything else conductor-independent.

#include "grosstower/classset.hpp"
#include "grosstower/embedding.hpp"
#include "grosstower/errors.hpp"
#include "grosstower/galois.hpp"
#include "grosstower/shimura.hpp"

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace grosstower {

// Tower plus one Shimura level per layer; everything downstream borrows it.
struct TowerContext {
  QuaternionAlgebra B{Rat(-1), Rat(-1)};
  EichlerTower tower;
  std::vector<ShimuraLevel> levels;

  TowerContext(const Int& n_minus, const Int& n_plus, const Int& p, int m_max, int precision = 0)
      : B(algebra_for_discriminant(n_minus, true)),
        tower(eichler_order_tower(B, n_plus, p, m_max,
                                  precision > 0 ? precision : m_max + 20)) {
    for (int m = 0; m <= m_max; ++m) levels.emplace_back(tower, m);
  }
  const ShimuraLevel& level(int m) const {
    if (m < 0 || m >= int(levels.size())) throw invalid_input("level out of range");
    return levels[std::size_t(m)];
  }
};

struct HeegnerPoint {
  Int conductor = 1;   // full conductor c' p^m
  int m = 0;
  TildePoint pt;       // classified tilde coordinates
  Quaternion b;        // B^x part of the classified representative
  Quaternion omega_f;  // f(sqrt(-D)) for the carried embedding
  PMat u_p;            // p-component of the recovered adelic unit
  std::map<Int, PMat> adelic_local;  // local coordinates at the support
  Quaternion b_glob;   // adelic coordinate = (local map) * b_glob^{-1}
};

class HeegnerSystem {
 public:
  HeegnerSystem(const TowerContext& ctx, const ImagQuadField& K, const Int& c0, int m_max,
                int h_max, std::optional<Int> aux_ell = std::nullopt)
      : ctx_(&ctx), K_(K), c0_(c0), m_max_(m_max), h_max_(h_max), aux_ell_(aux_ell) {
    const QuaternionAlgebra& B = ctx.B;
    const Int& p = ctx.tower.p;
    Int N = B.discriminant() * ctx.tower.n_plus;
    if (gcd_int(c0, N * p) != 1 || gcd_int(c0, K.D_K) != 1)
      throw invalid_input("heegner family: c must be prime to N p and disc(K)");
    auto hyp = check_heegner_hypothesis(ctx.tower.n_plus, B.discriminant(), K, p);
    if (!hyp.ok) throw invalid_input("heegner family: Heegner hypothesis fails");
    if (aux_ell_) {
      if (kronecker(K.D_K, *aux_ell_) != -1 || (N * p * c0) % *aux_ell_ == 0)
        throw invalid_input("heegner family: auxiliary l must be inert and prime to Npc");
    }
    omega_ = global_embedding_seed(B, K);
    p_split_in_K_ = (kronecker(K.D_K, p) == 1);

    // support primes and their splittings / conjugators
    std::set<Int> support{p};
    support.insert(2);
    for (auto& q : prime_divisors(K.D_K)) support.insert(abs_int(q));
    for (auto& q : prime_divisors(c0)) support.insert(q);
    for (auto& q : prime_divisors(ctx.tower.n_plus)) support.insert(q);
    for (auto& q : prime_divisors(num(B.a) * num(B.b))) support.insert(abs_int(q));
    if (aux_ell_) support.insert(*aux_ell_);
    for (auto& q : support) {
      if (B.ramified_at(q)) continue;  // optimality is automatic there
      const PadicSplitting& sp = splitting(q);
      PMat W = sp.phi(omega_);
      PMat X = local_model(q);
      conjugators_.emplace(q, skolem_noether_conjugator(sp.ring(), W, X));
    }

    for (int h = 0; h <= h_max_; ++h)
      for (int m = 0; m <= m_max_; ++m) build_point(c0_ * pow_int(p, unsigned(h)), m);
    if (aux_ell_)
      for (int m = 0; m <= m_max_; ++m) build_point(c0_ * *aux_ell_, m);
  }

  const TowerContext& context() const { return *ctx_; }
  const ImagQuadField& field() const { return K_; }
  const Quaternion& seed() const { return omega_; }
  const Int& base_conductor() const { return c0_; }
  int m_max() const { return m_max_; }
  int h_max() const { return h_max_; }
  std::optional<Int> aux_ell() const { return aux_ell_; }

  const PadicSplitting& splitting(const Int& q) {
    auto it = splittings_.find(q);
    if (it != splittings_.end()) return it->second;
    int W = ctx_->tower.precision + 6;
    if (q == ctx_->tower.p) return ctx_->tower.split_p;
    auto [jt, fresh] =
        splittings_.emplace(q, PadicSplitting(ctx_->B, ctx_->tower.maximal, q, W));
    return jt->second;
  }

  // P~_{c', m}; c' must belong to the built chain
  const HeegnerPoint& point(const Int& c_prime, int m) const {
    auto it = points_.find({c_prime, m});
    if (it == points_.end())
      throw invalid_input("heegner family: point (" + c_prime.str() + ", " +
                          std::to_string(m) + ") not built; family depth insufficient");
    return it->second;
  }
  bool has_point(const Int& c_prime, int m) const { return points_.count({c_prime, m}) > 0; }

  // the adelic consistency audits (16)/(17)/(18), checked componentwise
  struct AdelicAudit {
    bool eq16 = true, eq17 = true, eq18 = true;
  };
  AdelicAudit audit_adelic() const;

  Divisor class_divisor(const HeegnerPoint& P) const {
    return Divisor::point(ctx_->level(P.m), P.pt);
  }

  // Galois action through the idele representative; keeps the embedding.
  HeegnerPoint galois_act(const ExtendedGaloisGroup& egg, const GaloisElement& sigma,
                          const HeegnerPoint& P);

  // exact equality of points of X~_m^{(K)} carrying the same embedding
  bool points_equal(const HeegnerPoint& P1, const HeegnerPoint& P2) const;

  // Definition 3.1 verifier: exact global optimality + the p-local
  // congruence condition checked on the finite unit quotient.
  struct PointCertificate {
    bool optimal = false;
    bool p_local = false;
    int precision_used = 0;
    std::vector<std::pair<Int, bool>> per_prime;
    bool ok() const { return optimal && p_local; }
  };
  PointCertificate verify_point(const HeegnerPoint& P);

  // sum over the given lifts of <theta-twist(lift)>^{-1} P^{lift}
  // (weight-2 critical twist; trivial on tau = 1 lifts)
  Divisor twisted_trace(const ExtendedGaloisGroup& egg,
                        const std::vector<GaloisElement>& lifts, const HeegnerPoint& P);

 private:
  // w_0 X w_0^{-1} for w_0 = [[0,1],[-1,0]]: the level-0 member of the
  // conjugation chain w_m = pi_p^m w_0 behind phi_p^{(c,m)}. Without this
  // twist the pi-powers would keep landing in the lower-left entry, which
  // the Eichler congruence absorbs, and the conductor would never grow.
  static PMat w0_conjugate(const PMat& X) {
    return PMat(X.ring, X.shift,
                {X.m[3], X.ring.reduce(-X.m[2]), X.ring.reduce(-X.m[1]), X.m[0]});
  }

  PMat local_model(const Int& q) {
    const ZModRing& R = splitting(q).ring();
    const Int& p = ctx_->tower.p;
    if (q == p) {
      PMat psi = p_split_in_K_ ? model_split(R, K_.D, 0) : model_inert(R, K_.D, 0);
      return w0_conjugate(psi);
    }
    if (aux_ell_ && q == *aux_ell_) return w0_conjugate(model_inert(R, K_.D, 0));
    if (ctx_->tower.n_plus % q == 0)
      return model_eichler_split(R, K_, v_adic(ctx_->tower.n_plus, q));
    return model_companion(R, K_, v_adic(Int(c0_ * q), q) - 1);
  }

  // a^{(c', m)} as a local-matrix map
  std::map<Int, PMat> adelic_datum(const Int& c_prime, int m) {
    const Int& p = ctx_->tower.p;
    std::map<Int, PMat> out;
    for (auto& [q, A] : conjugators_) {
      if (q == p) {
        int e = m + v_adic(Int(c_prime * p), p) - 1;
        PMat pi = PMat::diag(A.ring, 1, p);
        PMat M = A;
        for (int k = 0; k < e; ++k) M = pi.mul(M);
        out.emplace(q, M);
      } else if (aux_ell_ && q == *aux_ell_ && c_prime % *aux_ell_ == 0) {
        out.emplace(q, PMat::diag(A.ring, 1, q).mul(A));
      } else {
        out.emplace(q, A);
      }
    }
    return out;
  }

  QuatLattice lattice_from_local(const std::map<Int, PMat>& data, int m) {
    QuatLattice J = ctx_->level(m).classes().order.lattice;
    auto basis = J.basis_quaternions();
    for (auto& [q, M] : data) {
      PMat Mn = M.normalized();
      if (Mn.shift == 0 && Mn.m == std::array<Int, 4>{1, 0, 0, 1}) continue;
      const PadicSplitting& sp = splitting(q);
      int w_minus = std::max(0, -Mn.shift) + 1;
      int vdet = Mn.ring.val(Mn.det_int()) + 2 * Mn.shift;
      int w_plus = std::abs(vdet) + w_minus + 2;
      std::vector<PMat> gens;
      for (auto& e : basis) gens.push_back(sp.phi(e).mul(M));
      J = sp.replace_local_part(J, gens, w_plus, w_minus);
    }
    return J;
  }

  HeegnerPoint make_point(const std::map<Int, PMat>& local, const Quaternion& b_glob,
                          const Quaternion& omega_f, const Int& conductor, int m) {
    const ShimuraLevel& L = ctx_->level(m);
    const QuaternionAlgebra& B = ctx_->B;
    QuatLattice J = lattice_from_local(local, m);
    J = lattice_mul_right(B, J, inverse(B, b_glob));
    auto [i, bhat] = classify_right_ideal(L.classes(), J);
    HeegnerPoint P;
    P.conductor = conductor;
    P.m = m;
    P.b = bhat;
    P.omega_f = omega_f;
    P.adelic_local = local;
    P.b_glob = b_glob;
    const PadicSplitting& sp = ctx_->tower.split_p;
    PMat Np = local.count(ctx_->tower.p) ? local.at(ctx_->tower.p)
                                         : PMat::identity(sp.ring());
    P.u_p = Np.mul(sp.phi(b_glob).inverse()).mul(sp.phi(bhat).inverse()).normalized();
    Int t = (m == 0) ? Int(0) : a_coordinate(P.u_p, L.p(), m);
    P.pt = TildePoint{i, (m == 0) ? Int(0) : L.canonical_fiber(i, t)};
    return P;
  }

  void build_point(const Int& c_prime, int m) {
    auto data = adelic_datum(c_prime, m);
    // bootstrap: classify the bare adelic lattice to get b_{c,m}
    QuatLattice Ja = lattice_from_local(data, m);
    auto [i0, bcm] = classify_right_ideal(ctx_->level(m).classes(), Ja);
    (void)i0;
    Quaternion omega_f =
        mul(ctx_->B, mul(ctx_->B, bcm, omega_), inverse(ctx_->B, bcm));
    points_.emplace(std::make_pair(c_prime, m),
                    make_point(data, bcm, omega_f, c_prime * pow_int(ctx_->tower.p, unsigned(m)), m));
  }

  const TowerContext* ctx_;
  ImagQuadField K_{Int(11)};
  Int c0_ = 1;
  int m_max_ = 0;
  int h_max_ = 0;
  std::optional<Int> aux_ell_;
  Quaternion omega_;
  bool p_split_in_K_ = false;
  std::map<Int, PadicSplitting> splittings_;
  std::map<Int, PMat> conjugators_;
  std::map<std::pair<Int, int>, HeegnerPoint> points_;
};

inline HeegnerSystem::AdelicAudit HeegnerSystem::audit_adelic() const {
  AdelicAudit audit;
  const Int& p = ctx_->tower.p;
  int prec = ctx_->tower.precision - m_max_ - h_max_ - 4;
  auto comp = [&](const std::map<Int, PMat>& A, const std::map<Int, PMat>& B,
                  const Int& at, const PMat* left) {
    for (auto& [q, M] : A) {
      PMat other = B.at(q);
      if (q == at && left) other = left->mul(other);
      if (!M.congruent(other, prec)) return false;
    }
    return true;
  };
  for (auto& [key, P] : points_) {
    auto& [cp, m] = key;
    PMat pi = PMat::diag(ctx_->tower.split_p.ring(), 1, p);
    if (m >= 1 && points_.count({cp, m - 1})) {
      // (16): a^{(c,m)} = pi_0 a^{(c,m-1)}
      audit.eq16 &= comp(P.adelic_local, points_.at({cp, m - 1}).adelic_local, p, &pi);
    }
    if (cp % p == 0 && points_.count({cp / p, m + 1})) {
      // (17): a^{(c p^h, m)} = a^{(c p^{h-1}, m+1)}
      audit.eq17 &= comp(P.adelic_local, points_.at({cp / p, m + 1}).adelic_local, 0, nullptr);
    }
    if (aux_ell_ && cp % *aux_ell_ == 0) {
      Int ell = *aux_ell_;
      if (points_.count({cp / ell, m})) {
        PMat pil = PMat::diag(splittings_.at(ell).ring(), 1, ell);
        audit.eq18 &= comp(P.adelic_local, points_.at({cp / ell, m}).adelic_local, ell, &pil);
      }
    }
  }
  return audit;
}

inline HeegnerPoint HeegnerSystem::galois_act(const ExtendedGaloisGroup& egg,
                                              const GaloisElement& sigma,
                                              const HeegnerPoint& P) {
  IdeleRep idl = egg.idele(sigma);
  std::map<Int, PMat> local = P.adelic_local;
  const QuaternionAlgebra& B = ctx_->B;
  // group repeated primes: (q e+ + e-)^k = q^k e+ + e-
  std::map<Int, int> mult;
  for (auto& q : idl.prime_word) mult[q]++;
  for (auto& [q, k] : mult) {
    const PadicSplitting& sp = splitting(q);
    const ZModRing& R = sp.ring();
    auto s = R.sqrt_unit(R.reduce(-K_.D));
    if (!s) throw internal_error("galois_act: word prime not split in K");
    Int qk = pow_int(q, unsigned(k));
    // g(xi) = (q^k + 1)/2 + (q^k - 1)/(2 s) omega
    Int half = R.inv(2);
    Int c1 = R.mul(R.reduce(qk + 1), half);
    Int c2 = R.mul(R.mul(R.reduce(qk - 1), half), R.inv(*s));
    PMat G = PMat::diag(R, c1, c1).add(sp.phi(omega_).scale_int(c2));
    auto it = local.find(q);
    if (it == local.end())
      local.emplace(q, G);
    else
      it->second = it->second.mul(G);
  }
  if (idl.p_scalar != 1) {
    const ZModRing& Rp = ctx_->tower.split_p.ring();
    PMat alpha = PMat::diag(Rp, Rp.reduce(idl.p_scalar), Rp.reduce(idl.p_scalar));
    auto it = local.find(ctx_->tower.p);
    if (it == local.end())
      local.emplace(ctx_->tower.p, alpha);
    else
      it->second = it->second.mul(alpha);
  }
  (void)B;
  return make_point(local, P.b_glob, P.omega_f, P.conductor, P.m);
}

inline bool HeegnerSystem::points_equal(const HeegnerPoint& P1, const HeegnerPoint& P2) const {
  if (P1.m != P2.m) return false;
  if (!(P1.omega_f == P2.omega_f))
    throw invalid_input("points_equal: points carry different embeddings");
  if (P1.pt.class_index != P2.pt.class_index) return false;
  const ShimuraLevel& L = ctx_->level(P1.m);
  const QuaternionAlgebra& B = ctx_->B;
  std::size_t i = P1.pt.class_index;
  Int pm = L.p_pow_m();
  // P1 = P2 iff some unit delta of the class right order satisfies
  // b1^{-1} delta b2 in f(K) and nu_i(delta) = t2 / t1 mod p^m
  Quaternion b1inv = inverse(B, P1.b);
  for (auto& delta : L.classes().unit_groups[i]) {
    Quaternion x = mul(B, mul(B, b1inv, delta), P2.b);
    // solve x = s + t omega_f over Q
    // coordinates: 4 equations, 2 unknowns; check consistency
    Vec4 xc = coords(x), e0 = coords(Quaternion::one()), w = coords(P1.omega_f);
    // find two independent coordinates of (e0, w)
    bool in_fK = false;
    for (int c1 = 0; c1 < 4 && !in_fK; ++c1)
      for (int c2 = c1 + 1; c2 < 4 && !in_fK; ++c2) {
        Rat det = e0[c1] * w[c2] - e0[c2] * w[c1];
        if (det == 0) continue;
        Rat s = (xc[c1] * w[c2] - xc[c2] * w[c1]) / det;
        Rat t = (e0[c1] * xc[c2] - e0[c2] * xc[c1]) / det;
        Quaternion rec = add(scal(s, Quaternion::one()), scal(t, P1.omega_f));
        in_fK = (rec == x);
      }
    if (!in_fK) continue;
    if (P1.m == 0) return true;
    Int nu = a_coordinate(L.splitting().phi(delta), L.p(), P1.m);
    if (mod_pos(nu * P1.pt.fiber, pm) == mod_pos(P2.pt.fiber, pm)) return true;
  }
  return false;
}

inline HeegnerSystem::PointCertificate HeegnerSystem::verify_point(const HeegnerPoint& P) {
  PointCertificate cert;
  const ShimuraLevel& L = ctx_->level(P.m);
  const QuaternionAlgebra& B = ctx_->B;
  // (a) exact global optimality into the right order of the class
  auto rep = verify_optimal(B, K_, P.omega_f, L.classes().right_orders[P.pt.class_index],
                            P.conductor);
  cert.optimal = rep.optimal;
  cert.per_prime = rep.per_prime;
  // (b) p-local condition on the finite unit quotient: for every unit
  // x = s + t p^{m+h} sqrt(-D) of O_{c'} tensor Z_p (enumerated mod p^B),
  //   f_p(x) in g_p^{-1} U_{m,p} g_p  iff  x in 1 + p^m O_K tensor Z_p.
  // g_p = u_p is an integral unit, so conjugation costs no precision and
  // B = m + h + 2 decides membership soundly.
  const Int& p = ctx_->tower.p;
  int m = P.m;
  int h = v_adic(Int(P.conductor * p), p) - 1 - m;
  const PadicSplitting& sp = ctx_->tower.split_p;
  const ZModRing& R = sp.ring();
  PMat W = P.u_p.normalized();
  if (W.shift != 0 || R.val(W.det_int()) != 0)
    throw internal_error("verify_point: adelic unit is not a unit");
  int Bprec = m + h + 2;
  cert.precision_used = Bprec;
  Int pB = pow_int(p, unsigned(Bprec));
  Int pmh = pow_int(p, unsigned(m + h));
  Int pm = pow_int(p, unsigned(m));
  PMat Winv = W.inverse();
  PMat om = sp.phi(P.omega_f);
  bool all_match = true;
  for (Int s = 1; s < pB && all_match; ++s) {
    if (s % p == 0) continue;
    for (Int t = 0; t < pB / pmh && all_match; ++t) {
      PMat fx = PMat::diag(R, s, s).add(om.scale_int(R.mul(t, pmh)));
      PMat Y = W.mul(fx).mul(Winv).normalized();
      bool integral_unit = Y.shift == 0 && R.val(Y.det_int()) == 0;
      bool lhs = integral_unit && Y.entry_val(1, 0) >= m && Y.entry_mod(0, 0, m) == mod_pos(1, pm);
      bool rhs = mod_pos(s - 1, pm) == 0;
      if (lhs != rhs) all_match = false;
    }
  }
  cert.p_local = all_match;
  return cert;
}

inline Divisor HeegnerSystem::twisted_trace(const ExtendedGaloisGroup& egg,
                                            const std::vector<GaloisElement>& lifts,
                                            const HeegnerPoint& P) {
  const ShimuraLevel& L = ctx_->level(P.m);
  Divisor out;
  out.m = P.m;
  for (auto& eta : lifts) {
    HeegnerPoint Q = galois_act(egg, eta, P);
    Int twist = 1;  // epsilon_wild^{1/2}(eta) mod p^m
    if (P.m >= 1 && egg.m() >= 1) {
      Int pm = L.p_pow_m();
      Int tau = mod_pos(eta.tau, pm);
      // Teichmueller part: tau^{p^{m-1}}; wild part: tau / omega(tau)
      Int teich = pow_mod(tau, pow_int(L.p(), unsigned(P.m - 1)), pm);
      Int wild = mod_pos(tau * inv_mod(teich, pm), pm);
      // square root of wild in 1 + pZ/p^m (unique)
      for (Int x = 1; x < pm; x += L.p()) {
        if (mod_pos(x * x - wild, pm) == 0) { twist = x; break; }
      }
      if (mod_pos(twist * twist - wild, pm) != 0)
        throw internal_error("twisted_trace: no wild square root");
    }
    // apply <twist>^{-1}: fiber t -> twist * t
    TildePoint tp = Q.pt;
    if (P.m >= 1) tp.fiber = L.canonical_fiber(tp.class_index, tp.fiber * twist);
    out.add(L.index_of(tp), 1);
  }
  return out;
}

}  // namespace grosstower
