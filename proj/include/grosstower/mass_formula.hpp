#pragma once

// Eichler mass formula for definite algebras over Q, kept apart from the
// class-set enumeration so the two cannot share a bug:
//   mass(N^-, level) = 1/12 * prod_{q | N^-} (q - 1) * psi(level),
//   psi(l) = l * prod_{q | l} (1 + 1/q),
// level coprime to N^-. The class-set builder certifies completeness by
// matching sum_i 1/#(Gamma_i / {+-1}) against this number.

#include "grosstower/numeric.hpp"

namespace grosstower {

inline Rat eichler_mass(const Int& n_minus, const Int& level) {
  Rat mass(1, 12);
  for (auto& [q, e] : factorize(n_minus)) {
    if (e != 1) throw std::invalid_argument("eichler_mass: N^- must be squarefree");
    mass *= Rat(q - 1);
  }
  Rat psi(level);
  for (auto& [q, e] : factorize(level)) psi *= Rat(q + 1, q);
  if (level == 1) psi = 1;
  return mass * psi;
}

}  // namespace grosstower
