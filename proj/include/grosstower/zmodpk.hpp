#pragma once

// Arithmetic in Z/p^W and 2x2 matrices over Q_p known to finite precision.
// A PMat holds p^shift * (integral 2x2 matrix mod p^W); shifts accumulate
// under multiplication so elements of GL_2(Q_p) with bounded valuation
// spread stay exactly representable at working precision.

#include "grosstower/errors.hpp"
#include "grosstower/numeric.hpp"

#include <array>
#include <optional>

namespace grosstower {

// Z/p^W with p odd prime (p = 2 allowed; sqrt helpers then refuse).
class ZModRing {
 public:
  ZModRing() = default;
  ZModRing(const Int& p, int W) : p_(p), W_(W), q_(pow_int(p, unsigned(W))) {
    if (W <= 0) throw invalid_input("ZModRing: precision must be positive");
  }

  const Int& p() const { return p_; }
  int precision() const { return W_; }
  const Int& modulus() const { return q_; }

  Int reduce(const Int& a) const { return mod_pos(a, q_); }
  template <class Expr>
  Int reduce(const Expr& e) const { return mod_pos(Int(e), q_); }
  Int reduce_rat(const Rat& r) const {
    Int d = den(r);
    if (d % p_ == 0) throw internal_error("ZModRing: p in denominator");
    return mod_pos(num(r) * inv_mod(d, q_), q_);
  }
  Int add(const Int& a, const Int& b) const { return mod_pos(a + b, q_); }
  Int sub(const Int& a, const Int& b) const { return mod_pos(a - b, q_); }
  Int mul(const Int& a, const Int& b) const { return mod_pos(a * b, q_); }
  bool is_unit(const Int& a) const { return mod_pos(a, p_) != 0; }
  Int inv(const Int& a) const {
    if (!is_unit(a)) throw internal_error("ZModRing: inverse of non-unit");
    return inv_mod(a, q_);
  }
  Int pow(const Int& b, const Int& e) const { return pow_mod(b, e, q_); }

  // valuation of a mod p^W; returns W for 0.
  int val(Int a) const {
    a = reduce(a);
    if (a == 0) return W_;
    int v = 0;
    while (a % p_ == 0) { a /= p_; ++v; }
    return v;
  }

  // Hensel lift of a square root of a unit square, p odd. Deterministic:
  // the returned root is the one whose mod-p residue is smallest.
  std::optional<Int> sqrt_unit(const Int& a) const {
    if (p_ == 2) throw internal_error("sqrt_unit: p=2 unsupported");
    Int a0 = mod_pos(a, p_);
    if (a0 == 0) return std::nullopt;
    Int r0 = -1;
    for (Int x = 1; x < p_; ++x)
      if (x * x % p_ == a0) { r0 = x; break; }
    if (r0 < 0) return std::nullopt;
    Int x = r0;
    Int pk = p_;
    while (pk < q_) {
      pk = pk * pk;
      if (pk > q_) pk = q_;
      // Newton step x <- (x + a/x)/2 mod pk
      Int ax = mod_pos(a, pk);
      x = mod_pos((x + ax * inv_mod(x, pk)) % pk * inv_mod(Int(2), pk), pk);
    }
    Int other = mod_pos(-x, q_);
    Int xm = mod_pos(x, p_), om = mod_pos(other, p_);
    return xm <= om ? x : other;
  }

 private:
  Int p_ = 0;
  int W_ = 0;
  Int q_ = 0;
};

// p^shift * m, entries of m in Z/p^W (row-major [a b; c d]).
// Holds its ring by value so instances stay valid independently of the
// splitting objects that created them.
struct PMat {
  ZModRing ring;
  int shift = 0;
  std::array<Int, 4> m{};

  PMat() = default;
  PMat(const ZModRing& rg, int sh, std::array<Int, 4> mm) : ring(rg), shift(sh), m(mm) {
    for (auto& x : m) x = ring.reduce(x);
  }

  static PMat identity(const ZModRing& ring) { return PMat(ring, 0, {1, 0, 0, 1}); }
  static PMat zero(const ZModRing& ring) { return PMat(ring, 0, {0, 0, 0, 0}); }
  static PMat diag(const ZModRing& ring, const Int& a, const Int& d) {
    return PMat(ring, 0, {a, 0, 0, d});
  }

  // Pull out powers of p common to all entries into the shift.
  PMat normalized() const {
    int v = ring.precision();
    for (auto& x : m) v = std::min(v, ring.val(x));
    if (v == 0 || v >= ring.precision()) return *this;
    Int pv = pow_int(ring.p(), unsigned(v));
    std::array<Int, 4> mm;
    for (int i = 0; i < 4; ++i) mm[i] = m[i] / pv;
    return PMat(ring, shift + v, mm);
  }

  Int det_int() const { return ring.reduce(m[0] * m[3] - m[1] * m[2]); }
  Int trace_int() const { return ring.add(m[0], m[3]); }

  PMat mul(const PMat& o) const {
    return PMat(ring, shift + o.shift,
                {ring.reduce(m[0] * o.m[0] + m[1] * o.m[2]), ring.reduce(m[0] * o.m[1] + m[1] * o.m[3]),
                 ring.reduce(m[2] * o.m[0] + m[3] * o.m[2]), ring.reduce(m[2] * o.m[1] + m[3] * o.m[3])});
  }

  PMat add(const PMat& o) const {
    int s = std::min(shift, o.shift);
    Int pa = pow_int(ring.p(), unsigned(shift - s));
    Int pb = pow_int(ring.p(), unsigned(o.shift - s));
    std::array<Int, 4> mm;
    for (int i = 0; i < 4; ++i) mm[i] = ring.reduce(m[i] * pa + o.m[i] * pb);
    return PMat(ring, s, mm);
  }

  PMat scale_int(const Int& c) const {
    std::array<Int, 4> mm;
    for (int i = 0; i < 4; ++i) mm[i] = ring.reduce(m[i] * c);
    return PMat(ring, shift, mm);
  }

  PMat scale_ppow(int e) const { return PMat(ring, shift + e, m); }

  // Inverse: p^{-shift} * adj(m)/det(m); det may carry a p-power.
  PMat inverse() const {
    PMat n = normalized();
    Int d = n.det_int();
    int vd = ring.val(d);
    if (vd >= ring.precision()) throw internal_error("PMat: inverse of (near-)singular matrix");
    Int pu = pow_int(ring.p(), unsigned(vd));
    Int unit = ring.inv(d / pu);
    std::array<Int, 4> adj = {ring.reduce(n.m[3] * unit), ring.reduce(-n.m[1] * unit),
                              ring.reduce(-n.m[2] * unit), ring.reduce(n.m[0] * unit)};
    return PMat(ring, -n.shift - vd, adj);
  }

  // Valuation of entry (i,j) seen as a Q_p number.
  int entry_val(int i, int j) const { return shift + ring.val(m[2 * i + j]); }

  // Entry as p-integral residue mod p^k; requires entry valuation >= 0.
  Int entry_mod(int i, int j, int k) const {
    Int e = m[2 * i + j];
    if (shift >= 0) {
      e = ring.reduce(e * pow_int(ring.p(), unsigned(shift)));
    } else {
      int v = ring.val(e);
      if (v + shift < 0) throw internal_error("PMat: entry not p-integral");
      e = e / pow_int(ring.p(), unsigned(-shift));
    }
    if (k > ring.precision() + std::min(shift, 0)) throw internal_error("PMat: precision exhausted");
    return mod_pos(e, pow_int(ring.p(), unsigned(k)));
  }

  bool congruent(const PMat& o, int k) const {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (entry_mod(i, j, k) != o.entry_mod(i, j, k)) return false;
    return true;
  }
};

}  // namespace grosstower
