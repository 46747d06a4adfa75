#pragma once

// Gal(H_{cp^m}(mu_{p^m})/K) as pairs (ring class of conductor cp^m,
// cyclotomic coordinate tau in (Z/p^m)^x) subject to the genus constraint
// chi_{p*}(tau) = eps(class), where both characters factor through the
// Legendre symbol mod p. Elements carry idele representatives: a word of
// split prime ideals for the class part and a p-scalar correcting the
// cyclotomic shadow (the shadow of a prime ideal above q is q, the shadow
// of the scalar alpha at p is alpha^{-2}).

#include "grosstower/cmfield.hpp"
#include "grosstower/errors.hpp"
#include "grosstower/numeric.hpp"

#include <optional>
#include <vector>

namespace grosstower {

struct GaloisElement {
  BQF form;  // reduced class in Pic(O_{cp^m})
  Int tau;   // unit mod p^m (tau = 1 when m = 0)
  bool operator==(const GaloisElement& o) const = default;
  bool operator<(const GaloisElement& o) const {
    if (!(form == o.form)) return form < o.form;
    return tau < o.tau;
  }
};

// Idele supported on finitely many places: prime-ideal word away from p
// and a scalar unit at p.
struct IdeleRep {
  std::vector<Int> prime_word;  // split primes q, each the canonical ideal above q
  Int p_scalar = 1;             // alpha: the p-component is the scalar alpha
};

class ExtendedGaloisGroup {
 public:
  ExtendedGaloisGroup() = default;

  ExtendedGaloisGroup(const ImagQuadField& K, const Int& c, int m, const Int& p,
                      const Int& avoid_extra = 1)
      : K_(K), c_(c), m_(m), p_(p), pm_(pow_int(p, unsigned(m))) {
    if (gcd_int(c, p) != 1) throw invalid_input("extended galois group: c must be prime to p");
    Int avoid = 2 * p * K.D_K * c * avoid_extra;
    pic_ = RingClassGroup(K, c * pm_, avoid);
    if (m_ == 0) {
      for (auto& f : pic_.forms()) elements_.push_back({f, Int(1)});
      return;
    }
    for (auto& f : pic_.forms()) {
      int e = eps(f);
      for (Int t = 1; t < pm_; ++t) {
        if (t % p == 0) continue;
        if (legendre(t, p) == e) elements_.push_back({f, t});
      }
    }
  }

  const RingClassGroup& pic() const { return pic_; }
  const ImagQuadField& field() const { return K_; }
  int m() const { return m_; }
  const Int& p() const { return p_; }
  const Int& p_pow_m() const { return pm_; }
  const std::vector<GaloisElement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }

  // genus character cutting out K(sqrt(p*)): on a split prime class it is
  // (q|p) by quadratic reciprocity for p* = (-1)^((p-1)/2) p
  int eps(const BQF& f) const {
    int s = 1;
    for (auto& q : pic_.word(f)) s *= int(legendre(q, p_));
    return s;
  }

  GaloisElement identity() const { return {pic_.identity(), Int(1)}; }

  GaloisElement compose_elements(const GaloisElement& x, const GaloisElement& y) const {
    return {compose(x.form, y.form), m_ == 0 ? Int(1) : mod_pos(x.tau * y.tau, pm_)};
  }

  GaloisElement invert_element(const GaloisElement& x) const {
    return {form_inverse(x.form), m_ == 0 ? Int(1) : inv_mod(x.tau, pm_)};
  }

  // square root of a unit mod p^m (exists iff legendre(u, p) = 1)
  std::optional<Int> sqrt_mod_pm(const Int& u) const {
    if (m_ == 0) return Int(1);
    if (legendre(u, p_) != 1) return std::nullopt;
    for (Int x = 1; x < pm_; ++x)  // p^m is desk-small
      if (mod_pos(x * x - u, pm_) == 0) return x;
    return std::nullopt;
  }

  // cyclotomic shadow of the canonical idele of the word-and-scalar shape
  Int shadow(const IdeleRep& idl) const {
    if (m_ == 0) return 1;
    Int s = 1;
    for (auto& q : idl.prime_word) s = mod_pos(s * q, pm_);
    Int a2 = mod_pos(idl.p_scalar * idl.p_scalar, pm_);
    return mod_pos(s * inv_mod(a2, pm_), pm_);
  }

  // idele representative: word of the class plus a p-scalar fixing tau
  IdeleRep idele(const GaloisElement& g) const {
    IdeleRep idl;
    idl.prime_word = pic_.word(g.form);
    if (m_ == 0) return idl;
    Int qprod = 1;
    for (auto& q : idl.prime_word) qprod = mod_pos(qprod * q, pm_);
    auto alpha = sqrt_mod_pm(mod_pos(qprod * inv_mod(g.tau, pm_), pm_));
    if (!alpha)
      throw internal_error("extended galois group: genus constraint violated for idele");
    // lift to an integer coprime to every prime in the word and to p
    Int a = *alpha;
    idl.p_scalar = a;
    if (shadow(idl) != g.tau) throw internal_error("extended galois group: shadow mismatch");
    return idl;
  }

  // elements fixing H_{cp^m}: trivial class part, tau a square mod p
  std::vector<GaloisElement> cyclotomic_fiber() const {
    std::vector<GaloisElement> out;
    for (auto& g : elements_)
      if (g.form == pic_.identity()) out.push_back(g);
    return out;
  }

 private:
  ImagQuadField K_{Int(11)};
  Int c_ = 1;
  int m_ = 0;
  Int p_ = 5;
  Int pm_ = 1;
  RingClassGroup pic_;
  std::vector<GaloisElement> elements_;
};

// Anticyclotomic layer: G_n = Z/p^n quotient of Pic(O_{p^{d(n)}}) through
// the canonical Sylow projection and a discrete log against the class of a
// fixed split prime. d(n) = n + 1 whenever p does not divide h_K; the
// general path computes d(n) from the p-part growth of the class numbers and
// is flagged experimental.
struct AnticycLayer {
  int n = 0;
  int d = 1;               // d(n)
  Int p = 0;
  Int pn = 1;              // p^n
  Int generator_prime = 0; // split prime whose class generates the p-part
  bool experimental = false;
  RingClassGroup pic;      // conductor p^{d(n)}

  // exponent data for the canonical Sylow projection x -> x^E
  Int sylow_exponent = 1;
  Int p_part_order = 1;    // p^e

  // label in Z/p^n of a class (the G_n coordinate)
  Int label(const BQF& f) const {
    if (n == 0) return 0;
    BQF x = sylow_project(f);
    // discrete log against the projected generator
    BQF g = sylow_project(pic.prime_form(generator_prime));
    BQF acc = pic.identity();
    for (Int k = 0; k < p_part_order; ++k) {
      if (acc == x) return mod_pos(k, pn);
      acc = compose(acc, g);
    }
    throw internal_error("AnticycLayer: discrete log failed (p-part not generated)");
  }

  BQF sylow_project(const BQF& f) const {
    BQF acc = pic.identity();
    BQF base = reduce_form(f);
    Int e = sylow_exponent;
    // square-and-multiply
    std::vector<int> bits;
    for (Int t = e; t > 0; t /= 2) bits.push_back(int(t % 2));
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) {
      acc = compose(acc, acc);
      if (*it) acc = compose(acc, base);
    }
    return acc;
  }
};

inline AnticycLayer anticyclotomic_layer(const ImagQuadField& K, const Int& p, int n,
                                         const Int& avoid_extra = 1) {
  AnticycLayer L;
  L.n = n;
  L.p = p;
  L.pn = pow_int(p, unsigned(n));
  Int hK = Int(reduced_primitive_forms(K.D_K).size());
  bool p_divides_hK = (hK % p == 0);
  L.experimental = p_divides_hK;
  if (!p_divides_hK) {
    L.d = n + 1;  // includes d(0) = 1, the normalization making nu(theta_1) = theta_0 exact
  } else {
    // p-part growth of h(O_{p^m})
    int m = 1;
    for (;; ++m) {
      Int h = class_number_formula_oracle(K, pow_int(p, unsigned(m)));
      int e = 0;
      while (h % p == 0) { h /= p; ++e; }
      if (e >= n) break;
      if (m > n + 20) throw internal_error("anticyclotomic_layer: d(n) search runaway");
    }
    L.d = std::max(m, 1);
  }
  Int avoid = 2 * p * K.D_K * avoid_extra;
  L.pic = RingClassGroup(K, pow_int(p, unsigned(L.d)), avoid);
  Int M = Int(L.pic.size());
  Int Mp = 1;
  while (M % p == 0) { M /= p; Mp *= p; }
  L.p_part_order = Mp;
  if (n > 0 && Mp < L.pn) throw internal_error("anticyclotomic_layer: p-part too small");
  // E = 0 mod M', E = 1 mod p^e
  Int Mprime = M;
  L.sylow_exponent = (Mp == 1) ? Int(Int(L.pic.size()))
                               : Mprime * inv_mod(mod_pos(Mprime, Mp), Mp);
  // generator: smallest split prime in the admissible list whose class
  // generates the p-part (spec's deterministic choice)
  for (auto& q : L.pic.generator_primes()) {
    AnticycLayer trial = L;
    trial.generator_prime = q;
    BQF g = trial.sylow_project(L.pic.prime_form(q));
    // order of g must be exactly p^e
    BQF acc = g;
    Int ord = 1;
    while (!(acc == L.pic.identity())) { acc = compose(acc, g); ++ord; }
    if (ord == Mp) { L.generator_prime = q; break; }
  }
  if (n > 0 && L.generator_prime == 0) {
    // widen the search beyond the word-table generators
    Int avoid2 = avoid;
    for (Int q = 2; q < 5000 && L.generator_prime == 0; ++q) {
      if (!is_prime(q) || L.pic.disc() % q == 0 || avoid2 % q == 0) continue;
      if (kronecker(L.pic.disc(), q) != 1) continue;
      BQF g = L.sylow_project(L.pic.prime_form(q));
      BQF acc = g;
      Int ord = 1;
      while (!(acc == L.pic.identity())) { acc = compose(acc, g); ++ord; }
      if (ord == L.p_part_order) L.generator_prime = q;
    }
    if (L.generator_prime == 0)
      throw math_nonexistence("anticyclotomic_layer: p-part of Pic(O_{p^d}) is not cyclic");
  }
  if (L.generator_prime == 0) L.generator_prime = L.pic.generator_primes().front();
  return L;
}

}  // namespace grosstower
