#include "grosstower/quaternion.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace grosstower;

TEST_CASE("hilbert symbol pinned values", "[quaternion]") {
  // (-1,-1,2) = -1: frozen from brute-force solvability of z^2 = -x^2-y^2
  // over Z/8 with a primitive solution (there is none).
  CHECK(hilbert_symbol(Rat(-1), Rat(-1), PlaceTag::finite(2)) == -1);
  CHECK(hilbert_symbol(Rat(1), Rat(7), PlaceTag::finite(3)) == 1);
  CHECK(hilbert_symbol(Rat(1), Rat(-5), PlaceTag::finite(2)) == 1);
  CHECK(hilbert_symbol(Rat(-1), Rat(-1), PlaceTag::infinity()) == -1);
  CHECK(hilbert_symbol(Rat(-1), Rat(-11), PlaceTag::finite(11)) == -1);
  CHECK(hilbert_symbol(Rat(-1), Rat(-11), PlaceTag::finite(2)) == 1);
  CHECK(hilbert_symbol(Rat(2), Rat(3), PlaceTag::finite(5)) == 1);
}

TEST_CASE("hilbert symbol at 2: exhaustive route agrees with eps/omega formula",
          "[quaternion][oracle]") {
  for (int a = -15; a <= 15; ++a)
    for (int b = -15; b <= 15; ++b) {
      if (a == 0 || b == 0) continue;
      INFO("a=" << a << " b=" << b);
      CHECK(hilbert_symbol(Rat(a), Rat(b), PlaceTag::finite(2)) ==
            hilbert_symbol_2_formula(Rat(a), Rat(b)));
    }
}

TEST_CASE("hilbert product formula over all places", "[quaternion]") {
  for (int a = -10; a <= 10; ++a)
    for (int b = -10; b <= 10; ++b) {
      if (a == 0 || b == 0) continue;
      int prod = hilbert_symbol(Rat(a), Rat(b), PlaceTag::infinity());
      std::set<Int> ps{2};
      for (auto& p : prime_divisors(Int(a) * Int(b))) ps.insert(abs_int(p));
      for (auto& p : ps) prod *= hilbert_symbol(Rat(a), Rat(b), PlaceTag::finite(p));
      INFO("a=" << a << " b=" << b);
      CHECK(prod == 1);
    }
}

TEST_CASE("algebra_for_discriminant", "[quaternion]") {
  QuaternionAlgebra B2 = algebra_for_discriminant(2, true);
  CHECK(B2.a == -1);
  CHECK(B2.b == -1);
  CHECK(B2.definite);
  CHECK(B2.ramified_finite == std::set<Int>{2});

  QuaternionAlgebra B11 = algebra_for_discriminant(11, true);
  CHECK(B11.a == -1);
  CHECK(B11.b == -11);
  CHECK(B11.ramified_finite == std::set<Int>{11});

  // verify the ramification of the returned algebra at every prime of 2ab N
  for (Int nm : {Int(2), Int(3), Int(5), Int(7), Int(11), Int(13)}) {
    QuaternionAlgebra B = algebra_for_discriminant(nm, true);
    std::set<Int> ps{2};
    for (auto& p : prime_divisors(num(B.a) * num(B.b) * nm)) ps.insert(abs_int(p));
    for (auto& p : ps) {
      bool ram = hilbert_symbol(B.a, B.b, PlaceTag::finite(p)) == -1;
      CHECK(ram == (nm % p == 0));
    }
  }

  CHECK_THROWS_AS(algebra_for_discriminant(15, true), invalid_input);  // even parity
  CHECK_THROWS_AS(algebra_for_discriminant(12, true), invalid_input);  // not squarefree
}

TEST_CASE("quaternion arithmetic", "[quaternion]") {
  QuaternionAlgebra B(-1, -1);
  Quaternion q{1, 1, 1, 1};
  CHECK(nrd(B, q) == 4);
  CHECK(trd(q) == 2);
  Quaternion r{2, 3, -1, 0};
  CHECK(mul(B, conj(r), r) == Quaternion::scalar(nrd(B, r)));
  Quaternion i{0, 1, 0, 0};
  CHECK(inverse(B, i) == Quaternion{0, -1, 0, 0});
  CHECK(mul(B, i, inverse(B, i)) == Quaternion::one());
  CHECK_THROWS_AS(inverse(B, Quaternion{}), invalid_input);
}

TEST_CASE("norm multiplicativity and definite positivity", "[quaternion][property]") {
  QuaternionAlgebra B(-1, -11);
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> d(-9, 9), e(1, 4);
  for (int it = 0; it < 200; ++it) {
    Quaternion u{Rat(d(rng), e(rng)), Rat(d(rng), e(rng)), Rat(d(rng), e(rng)), Rat(d(rng), e(rng))};
    Quaternion v{Rat(d(rng), e(rng)), Rat(d(rng), e(rng)), Rat(d(rng), e(rng)), Rat(d(rng), e(rng))};
    CHECK(nrd(B, mul(B, u, v)) == nrd(B, u) * nrd(B, v));
    if (!u.is_zero()) CHECK(nrd(B, u) > 0);
    CHECK(mul(B, u, conj(u)) == Quaternion::scalar(nrd(B, u)));
  }
}
