#include "grosstower/orders.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace grosstower;

TEST_CASE("maximal orders of the desk algebras", "[orders]") {
  QuaternionAlgebra B2(-1, -1);
  QuatLattice O2 = maximal_order_lattice(B2);
  CHECK(reduced_discriminant(B2, O2) == 2);
  CHECK(lattice_is_order(B2, O2));
  CHECK(O2.contains(Quaternion{Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(1, 2)}));

  QuaternionAlgebra B11(-1, -11);
  QuatLattice O11 = maximal_order_lattice(B11);
  CHECK(reduced_discriminant(B11, O11) == 11);
  CHECK(lattice_is_order(B11, O11));
  CHECK(lattice_index(standard_order_lattice(B11), O11) == Rat(1, 4));
}

TEST_CASE("splitting on the maximal order", "[orders][splitting]") {
  QuaternionAlgebra B(-1, -1);
  QuatLattice O = maximal_order_lattice(B);
  PadicSplitting sp(B, O, 5, 8);

  Quaternion i{0, 1, 0, 0}, j{0, 0, 1, 0};
  PMat I = sp.phi(i), J = sp.phi(j);
  CHECK(I.mul(I).congruent(PMat(sp.ring(), 0, {Int(-1), 0, 0, Int(-1)}), 8));
  CHECK(J.mul(J).congruent(PMat(sp.ring(), 0, {Int(-1), 0, 0, Int(-1)}), 8));
  CHECK(I.mul(J).congruent(J.mul(I).scale_int(Int(-1)), 8));
  CHECK(sp.phi(Quaternion::one()).congruent(PMat::identity(sp.ring()), 8));

  // det = nrd, tr = trd on a spanning-ish sample including denominators
  Quaternion q{Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(1, 2)};
  CHECK(sp.phi(q).det_int() == sp.ring().reduce_rat(nrd(B, q)));
  CHECK(sp.phi(q).trace_int() == sp.ring().reduce_rat(trd(q)));

  Quaternion one_fifth = scal(Rat(1, 5), Quaternion{1, 1, 0, 0});
  PMat M = sp.phi(one_fifth);
  CHECK(M.shift == -1);
  CHECK(M.mul(sp.phi(Quaternion{0, 0, 0, 5})).congruent(sp.phi(mul(B, one_fifth, Quaternion{0, 0, 0, 5})), 6));

  // multiplicativity on random-ish rational quaternions with 5-integral coords
  Quaternion u{Rat(3, 2), Rat(-1, 2), Rat(7, 3), Rat(2)};
  Quaternion v{Rat(0), Rat(4, 3), Rat(-5, 2), Rat(1, 6)};
  CHECK(sp.phi(mul(B, u, v)).congruent(sp.phi(u).mul(sp.phi(v)), 7));

  // inverse lift round-trips
  PMat W(sp.ring(), 0, {3, 1, 4, 1});
  Quaternion lift = sp.phi_inverse_lift(W);
  CHECK(O.contains(lift));
  CHECK(sp.phi(lift).congruent(W, 8));
}

TEST_CASE("splitting at q=2 for disc 11", "[orders][splitting]") {
  QuaternionAlgebra B(-1, -11);
  QuatLattice O = maximal_order_lattice(B);
  PadicSplitting sp(B, O, 2, 10);
  Quaternion i{0, 1, 0, 0};
  CHECK(sp.phi(i).mul(sp.phi(i)).congruent(PMat(sp.ring(), 0, {Int(-1), 0, 0, Int(-1)}), 10));
  CHECK(sp.phi(mul(B, i, i)).det_int() == sp.ring().reduce(Int(1)));
}

TEST_CASE("splitting rejects ramified primes", "[orders][splitting]") {
  QuaternionAlgebra B(-1, -1);
  QuatLattice O = maximal_order_lattice(B);
  CHECK_THROWS(PadicSplitting(B, O, 2, 8));
}

TEST_CASE("eichler tower disc 2, p = 5", "[orders]") {
  QuaternionAlgebra B = algebra_for_discriminant(2, true);
  EichlerTower T = eichler_order_tower(B, 1, 5, 2);
  CHECK(T.orders.size() == 3);
  CHECK(T.orders[0].reduced_disc == 2);   // maximal: level 1
  CHECK(T.orders[1].reduced_disc == 10);  // level 5
  CHECK(T.orders[2].reduced_disc == 50);  // level 25
  // local shape: lower-left of phi_p(R_m) vanishes mod p^m, and R_m is
  // exactly the preimage (indices match)
  for (int m = 1; m <= 2; ++m) {
    for (auto& b : T.orders[m].lattice.basis_quaternions())
      CHECK(T.split_p.phi(b).entry_mod(1, 0, m) == 0);
    CHECK(lattice_index(T.orders[0].lattice, T.orders[m].lattice) ==
          Rat(pow_int(5, unsigned(m))));
  }
  CHECK_THROWS_AS(eichler_order_tower(B, 1, 2, 1), invalid_input);  // p | N
}

TEST_CASE("eichler tower with nontrivial N^+", "[orders]") {
  QuaternionAlgebra B = algebra_for_discriminant(2, true);
  EichlerTower T = eichler_order_tower(B, 3, 5, 1);
  CHECK(T.orders[0].reduced_disc == 6);
  CHECK(T.orders[1].reduced_disc == 30);
  CHECK(lattice_is_order(B, T.orders[1].lattice));
}

TEST_CASE("eichler tower disc 11, p = 5", "[orders]") {
  QuaternionAlgebra B = algebra_for_discriminant(11, true);
  EichlerTower T = eichler_order_tower(B, 1, 5, 2);
  CHECK(T.orders[2].reduced_disc == 11 * 25);
}
