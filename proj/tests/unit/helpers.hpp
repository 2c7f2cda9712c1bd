#pragma once

#include <cmath>

#include "eqed/geometry.hpp"
#include "eqed/random.hpp"

namespace testing_support {

// Random cluster well inside a wavelength, detunings scattered around
// delta_B so M is far from singular.
inline eqed::EmitterLayout random_layout(int n, std::uint64_t seed, double delta_B = 1000.0, double box = 0.05) {
  eqed::CounterRng rng(seed, 0);
  eqed::EmitterLayout L;
  L.target = {0.0, 0.0, 0.0};
  L.gamma_A = 0.01;
  L.gamma_B = 0.01;
  L.g0_A = 1.0;
  L.g0_B = 1.0;
  for (int i = 0; i < n; ++i) {
    L.ensemble.push_back({rng.uniform(-box, box), rng.uniform(-box, box), rng.uniform(0.02, 0.02 + box)});
    L.detunings.push_back(delta_B + rng.uniform(-0.2, 0.2) * delta_B);
  }
  return L;
}

inline eqed::EmitterLayout fig1_cube(int n_side) {
  eqed::EmitterLayout L;
  L.gamma_A = L.gamma_B = 0.01;
  L.ensemble = eqed::build_centered_cube(n_side, 1e-3, {0, 0, 0.05});
  L.detunings.assign(L.ensemble.size(), 1000.0);
  return L;
}

inline bool close_rel(double a, double b, double rel, double floor = 1.0) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing_support
