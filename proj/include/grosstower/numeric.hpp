#pragma once

// Exact integer/rational arithmetic helpers shared across the library.
// All number theory here is desk-scale: trial division and direct loops
// are deliberate choices, not placeholders.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace grosstower {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline Int gcd_int(const Int& a, const Int& b) { return boost::multiprecision::gcd(a, b); }
inline Int lcm_int(const Int& a, const Int& b) { return boost::multiprecision::lcm(a, b); }

inline Int abs_int(const Int& a) { return a < 0 ? Int(-a) : a; }

// floor(sqrt(n)) for n >= 0.
inline Int isqrt(const Int& n) {
  if (n < 0) throw std::invalid_argument("isqrt of negative");
  if (n == 0) return 0;
  Int x = Int(1) << ((boost::multiprecision::msb(n) / 2) + 1);
  for (;;) {
    Int y = (x + n / x) / 2;
    if (y >= x) break;
    x = y;
  }
  return x;
}

inline bool is_square(const Int& n, Int* root = nullptr) {
  if (n < 0) return false;
  Int r = isqrt(n);
  if (r * r != n) return false;
  if (root) *root = r;
  return true;
}

// Exact rational square root; throws unless the argument is a perfect square.
inline Rat rat_sqrt(const Rat& r) {
  if (r < 0) throw std::invalid_argument("rat_sqrt of negative");
  Int n, d;
  if (!is_square(num(r), &n) || !is_square(den(r), &d))
    throw std::invalid_argument("rat_sqrt: not a perfect square");
  return Rat(n, d);
}

inline int v_adic(Int n, const Int& p) {
  if (n == 0) throw std::invalid_argument("v_adic of 0");
  int v = 0;
  while (n % p == 0) { n /= p; ++v; }
  return v;
}

inline int v_adic(const Rat& r, const Int& p) {
  return v_adic(num(r), p) - v_adic(den(r), p);
}

inline bool is_prime(const Int& n) {
  if (n < 2) return false;
  for (Int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::map<Int, int> factorize(Int n) {
  if (n == 0) throw std::invalid_argument("factorize 0");
  n = abs_int(n);
  std::map<Int, int> f;
  for (Int d = 2; d * d <= n; ++d)
    while (n % d == 0) { f[d]++; n /= d; }
  if (n > 1) f[n]++;
  return f;
}

inline std::vector<Int> prime_divisors(const Int& n) {
  std::vector<Int> ps;
  for (auto& [p, e] : factorize(n)) ps.push_back(p);
  return ps;
}

inline bool is_squarefree(const Int& n) {
  for (auto& [p, e] : factorize(n))
    if (e > 1) return false;
  return true;
}

inline Int pow_int(Int b, unsigned e) {
  Int r = 1;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline Int mod_pos(const Int& a, const Int& m) {
  Int r = a % m;
  if (r < 0) r += m;
  return r;
}

// Extended gcd: returns g and fills x, y with a*x + b*y = g.
inline Int ext_gcd(const Int& a, const Int& b, Int& x, Int& y) {
  if (b == 0) { x = (a < 0) ? -1 : 1; y = 0; return abs_int(a); }
  Int x1, y1;
  Int g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

inline Int inv_mod(const Int& a, const Int& m) {
  Int x, y;
  Int g = ext_gcd(mod_pos(a, m), m, x, y);
  if (g != 1) throw std::invalid_argument("inv_mod: not invertible");
  return mod_pos(x, m);
}

inline Int pow_mod(Int b, Int e, const Int& m) {
  b = mod_pos(b, m);
  Int r = 1;
  while (e > 0) {
    if (boost::multiprecision::bit_test(e, 0)) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

// Kronecker symbol (a|n), n arbitrary integer.
inline int kronecker(Int a, Int n) {
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  int sign = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) sign = -sign;
  }
  int v = 0;
  while (n % 2 == 0) { n /= 2; ++v; }
  if (v % 2 == 1) {
    if (a % 2 == 0) return 0;
    Int am8 = mod_pos(a, 8);
    if (am8 == 3 || am8 == 5) sign = -sign;
  }
  a = mod_pos(a, n);
  while (a != 0) {
    int w = 0;
    while (a % 2 == 0) { a /= 2; ++w; }
    if (w % 2 == 1) {
      Int nm8 = mod_pos(n, 8);
      if (nm8 == 3 || nm8 == 5) sign = -sign;
    }
    // quadratic reciprocity flip
    if (mod_pos(a, 4) == 3 && mod_pos(n, 4) == 3) sign = -sign;
    Int t = a;
    a = mod_pos(n, t);
    n = t;
  }
  return n == 1 ? sign : 0;
}

inline int legendre(const Int& a, const Int& p) { return kronecker(a, p); }

inline Int euler_phi_prime_power(const Int& p, int m) {
  if (m == 0) return 1;
  return pow_int(p, unsigned(m)) - pow_int(p, unsigned(m - 1));
}

inline std::string rat_to_string(const Rat& r) {
  return num(r).str() + "/" + den(r).str();
}

}  // namespace grosstower
