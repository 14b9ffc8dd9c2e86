#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mrir/common.hpp"
#include "mrir/manifest.hpp"
#include "mrir/rng.hpp"

namespace mrir {

// Proportional scaling of the 21/4/3 split; remainders round toward train.
inline std::array<std::size_t, 3> split_counts(std::size_t n_subjects) {
    const std::size_t val = n_subjects * 4 / 28;
    const std::size_t test = n_subjects * 3 / 28;
    if (val + test >= n_subjects) throw config_error("split_counts: too few subjects");
    return {n_subjects - val - test, val, test};
}

// Seeded subject-level partition: a permutation assigns the first counts[0]
// subjects to train, the next to val, the rest to test.
inline std::vector<Role> split_subjects(std::size_t n_subjects,
                                        const std::array<std::size_t, 3>& counts,
                                        std::uint64_t seed) {
    if (counts[0] + counts[1] + counts[2] != n_subjects)
        throw config_error("split_subjects: counts do not sum to the subject count");
    std::vector<std::size_t> order(n_subjects);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(Rng::derive(seed, "subject-split"));
    rng.shuffle(order.begin(), order.end());
    std::vector<Role> roles(n_subjects, Role::train);
    for (std::size_t i = 0; i < n_subjects; ++i) {
        const Role role = i < counts[0]             ? Role::train
                          : i < counts[0] + counts[1] ? Role::val
                                                      : Role::test;
        roles[order[i]] = role;
    }
    return roles;
}

}  // namespace mrir
