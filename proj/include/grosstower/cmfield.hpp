#pragma once

// Imaginary quadratic bookkeeping: K = Q(sqrt(-D)), the Heegner hypothesis,
// and ring class groups Pic(O_f) in the reduced-binary-quadratic-form model
// with Gaussian composition. Each class also carries a word in classes of
// small split primes (deterministic BFS); the words provide both the
// natural projections between conductors and idele representatives for
// Galois actions later on.

#include "grosstower/errors.hpp"
#include "grosstower/lattice.hpp"
#include "grosstower/numeric.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

namespace grosstower {

struct ImagQuadField {
  Int D;    // K = Q(sqrt(-D)), D > 0 squarefree
  Int D_K;  // fundamental discriminant

  explicit ImagQuadField(const Int& D_) : D(D_) {
    if (D <= 0 || !is_squarefree(D)) throw invalid_input("ImagQuadField: D must be squarefree > 0");
    D_K = (mod_pos(-D, 4) == 1) ? Int(-D) : Int(-4 * D);
  }
  static ImagQuadField from_fundamental(const Int& dk) {
    if (dk >= 0) throw invalid_input("ImagQuadField: discriminant must be negative");
    Int d;
    if (mod_pos(dk, 4) == 1) {
      d = -dk;
    } else {
      if (mod_pos(dk, 4) != 0 || !is_squarefree(Int(-dk / 4)) || mod_pos(Int(-dk / 4), 4) == 3)
        throw invalid_input("ImagQuadField: not a fundamental discriminant");
      d = -dk / 4;
    }
    if (mod_pos(dk, 4) == 1 && !is_squarefree(-dk))
      throw invalid_input("ImagQuadField: not a fundamental discriminant");
    ImagQuadField K(d);
    if (K.D_K != dk) throw invalid_input("ImagQuadField: not a fundamental discriminant");
    return K;
  }

  // [O_K^x : O_c^x] for c > 1 (1 for c = 1)
  Int unit_index(const Int& c) const {
    if (c == 1) return 1;
    if (D_K == -4) return 2;
    if (D_K == -3) return 3;
    return 1;
  }
};

struct HeegnerHypothesisReport {
  bool ok = false;
  std::vector<std::pair<Int, std::string>> primes;  // (prime, verdict)
};

inline HeegnerHypothesisReport check_heegner_hypothesis(const Int& n_plus, const Int& n_minus,
                                                        const ImagQuadField& K, const Int& p) {
  Int N = n_plus * n_minus;
  if (gcd_int(K.D_K, N * p) != 1) {
    for (auto& q : prime_divisors(gcd_int(K.D_K, N * p)))
      throw invalid_input("heegner hypothesis: disc(K) not coprime to Np at " + q.str());
  }
  HeegnerHypothesisReport rep;
  rep.ok = true;
  for (auto& l : prime_divisors(n_plus)) {
    bool split = kronecker(K.D_K, l) == 1;
    rep.primes.emplace_back(l, split ? "splits (required: split)" : "VIOLATION: must split");
    rep.ok &= split;
  }
  for (auto& l : prime_divisors(n_minus)) {
    bool inert = kronecker(K.D_K, l) == -1;
    rep.primes.emplace_back(l, inert ? "inert (required: inert)" : "VIOLATION: must be inert");
    rep.ok &= inert;
  }
  return rep;
}

// positive definite primitive binary quadratic form a x^2 + b xy + c y^2
struct BQF {
  Int a, b, c;
  bool operator==(const BQF& o) const = default;
  bool operator<(const BQF& o) const {
    if (a != o.a) return a < o.a;
    if (b != o.b) return b < o.b;
    return c < o.c;
  }
  Int disc() const { return b * b - 4 * a * c; }
};

inline BQF reduce_form(BQF f) {
  for (;;) {
    // normalize: -a < b <= a
    if (f.b > f.a || f.b <= -f.a) {
      Int r = floor_div(f.a - f.b, 2 * f.a);
      Int bn = f.b + 2 * r * f.a;
      Int cn = (bn * bn - f.disc()) / (4 * f.a);
      f.b = bn;
      f.c = cn;
    }
    if (f.a > f.c) {
      f = BQF{f.c, -f.b, f.a};
      continue;
    }
    break;
  }
  if (f.a == f.c && f.b < 0) f.b = -f.b;
  if (f.b == -f.a) f.b = f.a;  // unreachable after normalization; guard
  return f;
}

inline BQF identity_form(const Int& disc) {
  if (mod_pos(disc, 4) == 0) return BQF{1, 0, -disc / 4};
  return BQF{1, 1, (1 - disc) / 4};
}

// Gaussian composition (Dirichlet), followed by reduction.
inline BQF compose(const BQF& f1, const BQF& f2) {
  if (f1.disc() != f2.disc()) throw invalid_input("compose: discriminants differ");
  Int Dd = f1.disc();
  Int s = (f1.b + f2.b) / 2;
  Int n = (f1.b - f2.b) / 2;
  Int u1, v1, u2, w;
  Int d1 = ext_gcd(f1.a, f2.a, u1, v1);
  Int d = ext_gcd(d1, s, u2, w);
  Int u = u2 * u1, v = u2 * v1;
  Int a3 = (f1.a / d) * (f2.a / d);
  Int b3 = f2.b + 2 * (f2.a / d) * (v * n - w * f2.c);
  b3 = mod_pos(b3, 2 * a3);
  Int c3 = (b3 * b3 - Dd) / (4 * a3);
  return reduce_form(BQF{a3, b3, c3});
}

inline BQF form_inverse(const BQF& f) { return reduce_form(BQF{f.a, -f.b, f.c}); }

inline std::vector<BQF> reduced_primitive_forms(const Int& disc) {
  if (disc >= 0 || (mod_pos(disc, 4) != 0 && mod_pos(disc, 4) != 1))
    throw invalid_input("reduced_primitive_forms: not a negative discriminant");
  std::vector<BQF> out;
  for (Int a = 1; 3 * a * a <= -disc; ++a) {
    for (Int b = -a + 1; b <= a; ++b) {
      if (mod_pos(b - disc, 2) != 0) continue;
      Int num4 = b * b - disc;
      if (num4 % (4 * a) != 0) continue;
      Int c = num4 / (4 * a);
      if (c < a) continue;
      if (a == c && b < 0) continue;
      if (gcd_int(gcd_int(a, b), c) != 1) continue;
      out.push_back(BQF{a, b, c});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Classical conductor formula, the independent oracle for class counts:
// h(c^2 D_K) = h(D_K) c prod_{q | c} (1 - (D_K|q)/q) / [O_K^x : O_c^x].
inline Int class_number_formula_oracle(const ImagQuadField& K, const Int& c) {
  Int hK = Int(reduced_primitive_forms(K.D_K).size());
  Rat h = Rat(hK) * Rat(c);
  for (auto& q : prime_divisors(c)) h *= Rat(q - kronecker(K.D_K, q), q);
  h /= Rat(K.unit_index(c));
  if (den(h) != 1) throw internal_error("class_number_formula_oracle: non-integral value");
  return num(h);
}

// Ring class group Pic(O_f) of K with conductor f, with a word table over
// classes of split primes.
class RingClassGroup {
 public:
  RingClassGroup() = default;

  // avoid_primes: primes the generator set must stay coprime to (so idele
  // representatives stay supported away from them).
  RingClassGroup(const ImagQuadField& K, const Int& conductor, const Int& avoid = 1)
      : K_(K), f_(conductor), disc_(conductor * conductor * K.D_K) {
    forms_ = reduced_primitive_forms(disc_);
    if (Int(forms_.size()) != class_number_formula_oracle(K, conductor))
      throw internal_error("RingClassGroup: form count disagrees with the classical formula");
    for (std::size_t i = 0; i < forms_.size(); ++i) index_[forms_[i]] = i;
    build_words(avoid);
  }

  const ImagQuadField& field() const { return K_; }
  const Int& conductor() const { return f_; }
  const Int& disc() const { return disc_; }
  std::size_t size() const { return forms_.size(); }
  const std::vector<BQF>& forms() const { return forms_; }
  BQF identity() const { return identity_form(disc_); }

  std::size_t index_of(const BQF& f) const {
    auto it = index_.find(f);
    if (it == index_.end()) throw internal_error("RingClassGroup: unknown form");
    return it->second;
  }

  // class of the split prime q (canonical choice: b = sqrt(disc) mod 2q
  // with 0 <= b < 2q and b = disc mod 2)
  BQF prime_form(const Int& q) const {
    if (kronecker(disc_, q) != 1 || disc_ % q == 0)
      throw invalid_input("prime_form: q must be split and prime to the discriminant");
    std::optional<Int> b;
    for (Int x = 0; x < 2 * q; ++x)
      if (mod_pos(x * x - disc_, 4 * q) == 0) { b = x; break; }
    if (!b) throw internal_error("prime_form: no square root of disc mod 4q");
    return reduce_form(BQF{q, *b, (*b * *b - disc_) / (4 * q)});
  }

  // word of split primes whose classes multiply to the given class
  const std::vector<Int>& word(const BQF& f) const { return words_[index_of(reduce_form(f))]; }
  const std::vector<Int>& generator_primes() const { return gen_primes_; }

  // order of a class
  Int element_order(const BQF& f) const {
    BQF x = reduce_form(f);
    BQF e = identity();
    Int n = 1;
    while (!(x == e)) {
      x = compose(x, reduce_form(f));
      ++n;
      if (n > Int(2 * forms_.size())) throw internal_error("element_order: runaway");
    }
    return n;
  }

 private:
  void build_words(const Int& avoid) {
    words_.assign(forms_.size(), {});
    std::vector<bool> seen(forms_.size(), false);
    std::size_t id = index_of(identity());
    seen[id] = true;
    std::size_t found = 1;
    std::vector<std::size_t> frontier{id};
    Int q = 2;
    while (found < forms_.size() || gen_primes_.empty()) {
      // take the next admissible split prime
      while (!is_prime(q) || disc_ % q == 0 || avoid % q == 0 || kronecker(disc_, q) != 1) ++q;
      gen_primes_.push_back(q);
      BQF gq = prime_form(q);
      // exhaust multiplication by this generator over everything known
      bool grew = true;
      while (grew) {
        grew = false;
        for (std::size_t i = 0; i < forms_.size(); ++i) {
          if (!seen[i]) continue;
          BQF nf = compose(forms_[i], gq);
          std::size_t j = index_of(nf);
          if (!seen[j]) {
            seen[j] = true;
            words_[j] = words_[i];
            words_[j].push_back(q);
            ++found;
            grew = true;
          }
        }
      }
      ++q;
      if (q > 5000) throw internal_error("RingClassGroup: generator search exhausted");
    }
    // words multiply out to the right classes; re-check
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      BQF acc = identity();
      for (auto& pq : words_[i]) acc = compose(acc, prime_form(pq));
      if (!(acc == forms_[i])) throw internal_error("RingClassGroup: word table inconsistent");
    }
  }

  ImagQuadField K_{Int(11)};
  Int f_ = 1;
  Int disc_ = 0;
  std::vector<BQF> forms_;
  std::map<BQF, std::size_t> index_;
  std::vector<std::vector<Int>> words_;
  std::vector<Int> gen_primes_;
};

// Natural surjection Pic(O_f) -> Pic(O_{f'}) for f' | f, through the words.
inline BQF project_class(const RingClassGroup& big, const RingClassGroup& small, const BQF& f) {
  BQF acc = small.identity();
  for (auto& q : big.word(f)) acc = compose(acc, small.prime_form(q));
  return acc;
}

}  // namespace grosstower
