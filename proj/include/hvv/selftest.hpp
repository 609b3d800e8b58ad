#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hvv {

struct SelfTestResult {
    std::string suite;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Names of all gradient-checked operations.
const std::vector<std::string>& grad_checked_ops();

// Finite-difference check of one op on seeded random inputs; returns the max
// relative error.
double op_grad_check(const std::string& op, std::uint64_t seed);

// Finite-difference check through a small end-to-end forward pass, all
// branches enabled.
double model_grad_check(std::uint64_t seed);

// Gradient checks over every primitive op and a small end-to-end model,
// the Sinkhorn marginal suite, and the metric oracle. Deterministic.
std::vector<SelfTestResult> run_selftests();

}  // namespace hvv
