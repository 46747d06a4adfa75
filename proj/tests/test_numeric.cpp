#include "grosstower/numeric.hpp"
#include "grosstower/zmodpk.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace grosstower;

TEST_CASE("integer helpers", "[numeric]") {
  CHECK(isqrt(Int(0)) == 0);
  CHECK(isqrt(Int(35)) == 5);
  CHECK(isqrt(Int(36)) == 6);
  CHECK(is_square(Int(144)));
  CHECK(!is_square(Int(145)));
  CHECK(rat_sqrt(Rat(9, 4)) == Rat(3, 2));
  CHECK(v_adic(Int(200), Int(2)) == 3);
  CHECK(v_adic(Rat(3, 50), Int(5)) == -2);
  CHECK(is_prime(Int(97)));
  CHECK(!is_prime(Int(91)));
  CHECK(is_squarefree(Int(30)));
  CHECK(!is_squarefree(Int(12)));
  auto f = factorize(Int(360));
  CHECK(f[Int(2)] == 3);
  CHECK(f[Int(3)] == 2);
  CHECK(f[Int(5)] == 1);
}

TEST_CASE("modular helpers", "[numeric]") {
  CHECK(inv_mod(Int(3), Int(25)) == 17);
  CHECK(pow_mod(Int(2), Int(10), Int(1000)) == 24);
  CHECK(kronecker(Int(-11), Int(5)) == 1);   // -11 = 4 mod 5, a square: 5 splits in Q(sqrt(-11))
  CHECK(kronecker(Int(-3), Int(5)) == -1);   // 5 inert in Q(sqrt(-3))
  CHECK(kronecker(Int(-11), Int(7)) == -1);  // 7 inert in Q(sqrt(-11))
  CHECK(kronecker(Int(-7), Int(2)) == 1);    // -7 = 1 mod 8: 2 splits
  CHECK(kronecker(Int(-11), Int(2)) == -1);  // -11 = 5 mod 8: 2 inert
}

TEST_CASE("kronecker at 2 matches brute-force squares mod 8", "[numeric][oracle]") {
  // for discriminant-like d (d = 1 mod 4): (d|2) = +1 iff d is an odd square mod 8
  for (int d = -51; d <= 49; d += 4) {
    if (d == 1) continue;
    bool square_mod8 = false;
    for (int x = 1; x < 8; x += 2)
      if ((x * x - d) % 8 == 0) square_mod8 = true;
    int expected = square_mod8 ? 1 : -1;
    CHECK(kronecker(Int(d), Int(2)) == expected);
  }
}

TEST_CASE("Z/p^W ring", "[numeric]") {
  ZModRing R(5, 8);
  CHECK(R.modulus() == 390625);
  CHECK(R.mul(R.inv(7), 7) == 1);
  CHECK(R.val(250) == 3);
  auto r = R.sqrt_unit(Int(4));
  REQUIRE(r.has_value());
  CHECK(R.mul(*r, *r) == 4);
  CHECK(*r == 2);  // canonical root has smallest mod-p residue
  auto s = R.sqrt_unit(Int(-11));
  REQUIRE(s.has_value());
  CHECK(R.mul(*s, *s) == R.reduce(Int(-11)));
  CHECK(!R.sqrt_unit(Int(2)).has_value());  // 2 is not a square mod 5
}

TEST_CASE("PMat arithmetic", "[numeric]") {
  ZModRing R(5, 10);
  PMat a(R, 0, {2, 1, 0, 3});
  PMat pi = PMat::diag(R, 1, 5);           // valuation-1 determinant
  PMat prod = pi.mul(a);
  PMat back = prod.mul(a.inverse());
  CHECK(back.congruent(pi, 6));
  PMat inv = pi.inverse();
  CHECK(pi.mul(inv).congruent(PMat::identity(R), 6));
  CHECK(inv.entry_val(1, 1) == -1);
  CHECK(prod.entry_mod(0, 0, 6) == 2);
}
