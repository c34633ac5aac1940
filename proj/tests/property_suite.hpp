#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Randomized invariant checks shared by test_properties and the acceptance binary.
namespace props {

struct Check {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool ok = false;
};

constexpr int kDegreeCap = 12;
constexpr int kGuard = 8;
constexpr int kSeeds = 32;

// Constructed random tuple (n = 3, m = 2, p = 2) plus a random block-diagonal near-isometry.
std::vector<Check> run_seed(std::uint64_t seed);

}  // namespace props
