#pragma once

// Rational quaternion algebras B = (a,b/Q): exact element arithmetic,
// Hilbert symbols, and the deterministic search for an algebra with
// prescribed ramification.

#include "grosstower/errors.hpp"
#include "grosstower/numeric.hpp"

#include <optional>
#include <set>
#include <vector>

namespace grosstower {

struct PlaceTag {
  bool infinite = false;
  Int p = 0;  // meaningful when !infinite
  static PlaceTag infinity() { return {true, 0}; }
  static PlaceTag finite(const Int& p) { return {false, p}; }
};

namespace detail {

// Strip square factors: a ~ squarefree kernel in Q^x / (Q^x)^2.
inline Int square_class(const Rat& a) {
  Int n = num(a) * den(a);
  Int s = (n < 0) ? Int(-1) : Int(1);
  for (auto& [p, e] : factorize(n))
    if (e % 2 == 1) s *= p;
  return s;
}

// Exhaustive test for a primitive solution of z^2 = a x^2 + b y^2 mod 2^k.
inline bool solvable_mod_2k(const Int& a, const Int& b, int k) {
  Int M = pow_int(2, unsigned(k));
  for (Int z = 0; z < M; ++z)
    for (Int x = 0; x < M; ++x)
      for (Int y = 0; y < M; ++y) {
        if (x % 2 == 0 && y % 2 == 0 && z % 2 == 0) continue;
        if (mod_pos(a * x * x + b * y * y - z * z, M) == 0) return true;
      }
  return false;
}

}  // namespace detail

// Hilbert symbol (a,b)_v over Q. At p = 2 the primary route is exhaustive
// solvability mod 2^k, k = 3 + v_2(a) + v_2(b); hilbert_symbol_2_formula
// gives the closed form used as a cross-check.
inline int hilbert_symbol(const Rat& a_in, const Rat& b_in, const PlaceTag& v) {
  if (a_in == 0 || b_in == 0) throw invalid_input("hilbert_symbol: arguments must be nonzero");
  Int a = detail::square_class(a_in);
  Int b = detail::square_class(b_in);
  if (v.infinite) return (a < 0 && b < 0) ? -1 : 1;
  const Int& p = v.p;
  if (!is_prime(p)) throw invalid_input("hilbert_symbol: place must be prime or infinity");
  int alpha = v_adic(a, p), beta = v_adic(b, p);
  Int u = a / pow_int(p, unsigned(alpha));
  Int w = b / pow_int(p, unsigned(beta));
  if (p == 2) {
    return detail::solvable_mod_2k(a, b, 3 + alpha + beta) ? 1 : -1;
  }
  int s = 1;
  if (beta % 2 == 1) s *= legendre(u, p);
  if (alpha % 2 == 1) s *= legendre(w, p);
  if (alpha % 2 == 1 && beta % 2 == 1) s *= legendre(Int(-1), p);
  return s;
}

// (a,b)_2 via the epsilon/omega characters, for odd-part units u, v:
// (-1)^{eps(u)eps(v) + alpha*omega(v) + beta*omega(u)}.
inline int hilbert_symbol_2_formula(const Rat& a_in, const Rat& b_in) {
  Int a = detail::square_class(a_in);
  Int b = detail::square_class(b_in);
  int alpha = v_adic(a, 2), beta = v_adic(b, 2);
  Int u = a / pow_int(2, unsigned(alpha));
  Int v = b / pow_int(2, unsigned(beta));
  auto eps = [](const Int& x) { return int(mod_pos((x - 1) / 2, 2)); };
  auto omg = [](const Int& x) { return int(mod_pos((x * x - 1) / 8, 2)); };
  int e = eps(u) * eps(v) + alpha * omg(v) + beta * omg(u);
  return e % 2 == 0 ? 1 : -1;
}

struct QuaternionAlgebra {
  Rat a, b;                      // i^2 = a, j^2 = b, ij = -ji
  std::set<Int> ramified_finite;
  bool definite = false;

  QuaternionAlgebra(const Rat& a_, const Rat& b_) : a(a_), b(b_) {
    if (a == 0 || b == 0) throw invalid_input("QuaternionAlgebra: a, b must be nonzero");
    std::set<Int> cand;
    cand.insert(2);
    for (auto& p : prime_divisors(detail::square_class(a) * detail::square_class(b)))
      cand.insert(abs_int(p));
    for (auto& p : cand)
      if (hilbert_symbol(a, b, PlaceTag::finite(p)) == -1) ramified_finite.insert(p);
    definite = hilbert_symbol(a, b, PlaceTag::infinity()) == -1;
    // parity of the ramification set, infinite place included, must be even
    if ((ramified_finite.size() + (definite ? 1 : 0)) % 2 != 0)
      throw internal_error("QuaternionAlgebra: Hilbert product formula violated");
  }

  Int discriminant() const {
    Int d = 1;
    for (auto& p : ramified_finite) d *= p;
    return d;
  }
  bool ramified_at(const Int& p) const { return ramified_finite.count(p) > 0; }
};

struct Quaternion {
  Rat t, x, y, z;  // t + x i + y j + z ij

  Quaternion() : t(0), x(0), y(0), z(0) {}
  Quaternion(Rat t_, Rat x_, Rat y_, Rat z_) : t(t_), x(x_), y(y_), z(z_) {}
  static Quaternion one() { return {1, 0, 0, 0}; }
  static Quaternion scalar(const Rat& s) { return {s, 0, 0, 0}; }

  bool operator==(const Quaternion& o) const = default;
  bool is_zero() const { return t == 0 && x == 0 && y == 0 && z == 0; }
};

inline Quaternion add(const Quaternion& u, const Quaternion& v) {
  return {u.t + v.t, u.x + v.x, u.y + v.y, u.z + v.z};
}
inline Quaternion sub(const Quaternion& u, const Quaternion& v) {
  return {u.t - v.t, u.x - v.x, u.y - v.y, u.z - v.z};
}
inline Quaternion scal(const Rat& c, const Quaternion& u) {
  return {c * u.t, c * u.x, c * u.y, c * u.z};
}

inline Quaternion mul(const QuaternionAlgebra& B, const Quaternion& u, const Quaternion& v) {
  const Rat &a = B.a, &b = B.b;
  // (t1 + x1 i + y1 j + z1 ij)(t2 + x2 i + y2 j + z2 ij), ij = -ji, i^2=a, j^2=b
  return {u.t * v.t + a * u.x * v.x + b * u.y * v.y - a * b * u.z * v.z,
          u.t * v.x + u.x * v.t - b * u.y * v.z + b * u.z * v.y,
          u.t * v.y + u.y * v.t + a * u.x * v.z - a * u.z * v.x,
          u.t * v.z + u.z * v.t + u.x * v.y - u.y * v.x};
}

inline Quaternion conj(const Quaternion& u) { return {u.t, -u.x, -u.y, -u.z}; }
inline Rat trd(const Quaternion& u) { return 2 * u.t; }
inline Rat nrd(const QuaternionAlgebra& B, const Quaternion& u) {
  return u.t * u.t - B.a * u.x * u.x - B.b * u.y * u.y + B.a * B.b * u.z * u.z;
}

inline Quaternion inverse(const QuaternionAlgebra& B, const Quaternion& u) {
  Rat n = nrd(B, u);
  if (n == 0) throw invalid_input("Quaternion inverse: norm zero");
  return scal(Rat(1) / n, conj(u));
}

// The unique definite algebra of squarefree discriminant N^-, found by the
// fixed candidate scan: a over -1 then -q (q prime), b descending from -1.
inline QuaternionAlgebra algebra_for_discriminant(const Int& n_minus, bool require_definite) {
  if (n_minus <= 0 || !is_squarefree(n_minus))
    throw invalid_input("algebra_for_discriminant: N^- must be squarefree positive");
  std::size_t nprimes = prime_divisors(n_minus).size();
  if (require_definite && nprimes % 2 == 0)
    throw invalid_input("algebra_for_discriminant: even number of prime factors cannot be definite");
  if (!require_definite && nprimes % 2 == 1)
    throw invalid_input("algebra_for_discriminant: odd number of prime factors forces definite");
  if (!require_definite)
    throw invalid_input("algebra_for_discriminant: only definite algebras are supported");

  std::vector<Int> a_candidates{-1};
  for (Int q = 2; q <= 8 * n_minus + 16; ++q)
    if (is_prime(q)) a_candidates.push_back(-q);

  Int b_bound = 8 * n_minus * n_minus + 64;
  for (const Int& a : a_candidates) {
    for (Int b = -1; b >= -b_bound; --b) {
      QuaternionAlgebra B{Rat(a), Rat(b)};
      if (B.definite && B.discriminant() == n_minus) return B;
    }
  }
  throw internal_error("algebra_for_discriminant: candidate search exhausted");
}

}  // namespace grosstower
