#pragma once

#include <functional>
#include <vector>

#include "hvv/tensor.hpp"

namespace hvv {

// A scalar-valued computation rebuilt from scratch on the given tape; it must
// read its inputs from the current values of the checked parameters.
using ScalarFn = std::function<TensorPtr(Tape&)>;

// Central-difference check of tape gradients: perturbs every entry of every
// parameter by +-h, recomputes f, and compares (f+ - f-)/2h against the
// analytic gradient from one backward pass. Returns the max over entries of
// |analytic - numeric| / max(1, |numeric|).
double finite_diff_check(const ScalarFn& f, const std::vector<TensorPtr>& params, double h);

}  // namespace hvv
