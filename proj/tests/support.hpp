#pragma once

// Shared helpers for the unit suites.

#include <random>

#include "mrfmech/gen.hpp"

namespace testsupport {

inline mrfmech::Mrf random_mrf(std::mt19937_64& rng, int n_min, int n_max, int sup_min, int sup_max,
                               double cap) {
    return mrfmech::gen::random_mrf(rng, n_min, n_max, sup_min, sup_max, cap);
}

}  // namespace testsupport
