#include "grosstower/galois.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace grosstower;

TEST_CASE("imaginary quadratic fields", "[cmfield]") {
  ImagQuadField K11(Int(11));
  CHECK(K11.D_K == -11);
  ImagQuadField K3(Int(3));
  CHECK(K3.D_K == -3);
  ImagQuadField K1(Int(1));
  CHECK(K1.D_K == -4);
  ImagQuadField K5(Int(5));
  CHECK(K5.D_K == -20);
  CHECK_THROWS_AS(ImagQuadField(Int(12)), invalid_input);
  CHECK(ImagQuadField::from_fundamental(Int(-11)).D == 11);
}

TEST_CASE("heegner hypothesis", "[cmfield]") {
  // (N+=1, N-=2, K=Q(sqrt(-11))): 2 inert since -11 = 5 mod 8
  CHECK(check_heegner_hypothesis(1, 2, ImagQuadField(Int(11)), 5).ok);
  // (N-=2, K=Q(sqrt(-7))): -7 = 1 mod 8, 2 splits: hypothesis fails
  CHECK(!check_heegner_hypothesis(1, 2, ImagQuadField(Int(7)), 5).ok);
  // theta instance: N- = 11 inert in Q(sqrt(-3))
  CHECK(check_heegner_hypothesis(1, 11, ImagQuadField(Int(3)), 5).ok);
  // gcd violation: D_K = -20, N p = 10
  CHECK_THROWS_AS(check_heegner_hypothesis(1, 2, ImagQuadField(Int(5)), 5), invalid_input);
}

TEST_CASE("heegner hypothesis against brute-force residue oracle", "[cmfield][oracle]") {
  // split at odd l iff D_K is a nonzero square mod l
  for (Int Dv : {Int(11), Int(3), Int(7), Int(19)}) {
    ImagQuadField K(Dv);
    for (Int l : {Int(3), Int(5), Int(7), Int(13)}) {
      if (K.D_K % l == 0) continue;
      bool sq = false;
      for (Int x = 1; x < l; ++x)
        if (mod_pos(x * x - K.D_K, l) == 0) sq = true;
      CHECK((kronecker(K.D_K, l) == 1) == sq);
    }
  }
}

TEST_CASE("form reduction and composition basics", "[cmfield]") {
  // disc -23: class group Z/3 = {(1,1,6), (2,1,3), (2,-1,3)}
  auto forms = reduced_primitive_forms(Int(-23));
  REQUIRE(forms.size() == 3);
  BQF f{2, 1, 3};
  BQF f2 = compose(f, f);
  CHECK(f2 == BQF{2, -1, 3});
  CHECK(compose(f2, f) == identity_form(Int(-23)));
  CHECK(form_inverse(f) == f2);
  CHECK(compose(identity_form(Int(-23)), f) == f);
}

TEST_CASE("ring class groups match the classical formula oracle", "[cmfield][oracle]") {
  ImagQuadField K11(Int(11));
  CHECK(RingClassGroup(K11, 1).size() == 1);   // only x^2 + xy + 3y^2
  CHECK(RingClassGroup(K11, 5).size() == 4);   // disc -275
  ImagQuadField K3(Int(3));
  CHECK(RingClassGroup(K3, 5).size() == 2);    // disc -75
  CHECK(RingClassGroup(K3, 25).size() == 10);  // disc -1875 = 25^2 * (-3)
  // cross-check a batch against the formula
  for (Int c : {Int(1), Int(2), Int(3), Int(7), Int(10)}) {
    INFO("c = " << c.str());
    CHECK(Int(RingClassGroup(K11, c, 11 * 5).size()) == class_number_formula_oracle(K11, c));
  }
}

TEST_CASE("group axioms exhaustively on small groups", "[cmfield][property]") {
  ImagQuadField K11(Int(11));
  for (Int c : {Int(5), Int(6)}) {
    RingClassGroup G(K11, c);
    REQUIRE(G.size() <= 50);
    BQF e = G.identity();
    for (auto& x : G.forms()) {
      CHECK(compose(e, x) == x);
      CHECK(compose(x, form_inverse(x)) == e);
      for (auto& y : G.forms()) {
        CHECK(compose(x, y) == compose(y, x));
        for (auto& z : G.forms())
          CHECK(compose(compose(x, y), z) == compose(x, compose(y, z)));
      }
    }
  }
}

TEST_CASE("word tables and projections between conductors", "[cmfield]") {
  ImagQuadField K3(Int(3));
  Int avoid = 2 * 5 * 3 * 11;
  RingClassGroup G25(K3, 25, avoid);
  RingClassGroup G5(K3, 5, avoid);
  // natural surjection commutes with prime classes and is a homomorphism
  for (auto& f : G25.forms()) {
    for (auto& g : G25.forms()) {
      BQF lhs = project_class(G25, G5, compose(f, g));
      BQF rhs = compose(project_class(G25, G5, f), project_class(G25, G5, g));
      CHECK(lhs == rhs);
    }
  }
  // kernel size = h(25)/h(5) = 5
  std::size_t ker = 0;
  for (auto& f : G25.forms())
    if (project_class(G25, G5, f) == G5.identity()) ++ker;
  CHECK(ker == 5);
}

TEST_CASE("extended galois group orders", "[galois]") {
  // desk instance: K = Q(sqrt(-11)), c = 1, m = 1, p = 5: order 4 * phi(5)/2 = 8
  ExtendedGaloisGroup G(ImagQuadField(Int(11)), 1, 1, 5, 2);
  CHECK(G.size() == 8);
  CHECK(G.pic().size() == 4);
  // cyclotomic fiber = Gal(H(mu_p)/H) has order phi(p)/2
  CHECK(G.cyclotomic_fiber().size() == 2);
  // m = 0 degenerates to Pic(O_c)
  ExtendedGaloisGroup G0(ImagQuadField(Int(11)), 1, 0, 5, 2);
  CHECK(G0.size() == 1);
  ExtendedGaloisGroup G0c(ImagQuadField(Int(11)), 5, 0, 7, 2);
  CHECK(G0c.size() == 4);  // plain Pic(O_5), disc -275
  // group laws
  for (auto& x : G.elements())
    for (auto& y : G.elements()) {
      GaloisElement xy = G.compose_elements(x, y);
      CHECK(G.compose_elements(xy, G.invert_element(y)) == x);
    }
}

TEST_CASE("idele representatives have the right shadows", "[galois]") {
  ExtendedGaloisGroup G(ImagQuadField(Int(11)), 1, 1, 5, 2);
  for (auto& g : G.elements()) {
    IdeleRep idl = G.idele(g);
    CHECK(G.shadow(idl) == g.tau);
    for (auto& q : idl.prime_word) {
      CHECK(is_prime(q));
      CHECK(kronecker(Int(-11), q) == 1);  // split primes only
      CHECK(q % 5 != 0);
      CHECK(q % 2 != 0);
    }
  }
}

TEST_CASE("anticyclotomic layers", "[galois]") {
  ImagQuadField K3(Int(3));
  AnticycLayer L0 = anticyclotomic_layer(K3, 5, 0);
  CHECK(L0.d == 1);  // d(0) = 1 under the theta normalization
  AnticycLayer L1 = anticyclotomic_layer(K3, 5, 1);
  CHECK(L1.d == 2);  // p does not divide h_K: d(n) = n + 1
  CHECK(!L1.experimental);
  CHECK(Int(L1.pic.size()) == 10);
  CHECK(L1.p_part_order == 5);
  // labels: a surjective homomorphism Pic(O_25) -> Z/5
  std::map<Int, int> counts;
  for (auto& f : L1.pic.forms()) counts[L1.label(f)]++;
  CHECK(counts.size() == 5);
  for (auto& [k, v] : counts) CHECK(v == 2);
  for (auto& f : L1.pic.forms())
    for (auto& g : L1.pic.forms())
      CHECK(L1.label(compose(f, g)) == mod_pos(L1.label(f) + L1.label(g), 5));
}

TEST_CASE("anticyclotomic layer compatibility across n", "[galois]") {
  ImagQuadField K3(Int(3));
  AnticycLayer L1 = anticyclotomic_layer(K3, 5, 1);
  AnticycLayer L2 = anticyclotomic_layer(K3, 5, 2);
  CHECK(L2.d == 3);
  CHECK(L2.generator_prime == L1.generator_prime);
  // label of the projection = label mod p^n
  for (auto& f : L2.pic.forms()) {
    BQF pf = project_class(L2.pic, L1.pic, f);
    CHECK(L1.label(pf) == mod_pos(L2.label(f), 5));
  }
}
