#include "hvv/gradcheck.hpp"

#include <cmath>

#include "hvv/errors.hpp"

namespace hvv {

namespace {

double eval_scalar(const ScalarFn& f) {
    Tape tape;
    auto loss = f(tape);
    if (loss->rows != 1 || loss->cols != 1) {
        throw NumericError("finite_diff_check: computation is not scalar-valued, got " +
                           loss->shape_str());
    }
    const double v = loss->at(0, 0);
    if (!std::isfinite(v)) {
        throw NumericError("finite_diff_check: computation produced a non-finite value");
    }
    return v;
}

}  // namespace

double finite_diff_check(const ScalarFn& f, const std::vector<TensorPtr>& params, double h) {
    if (h < 1e-7 || h > 1e-3) {
        throw ValidationError("finite_diff_check: h must lie in [1e-7, 1e-3]");
    }
    // analytic gradients
    std::vector<std::vector<double>> analytic;
    {
        for (const auto& p : params) p->zero_grad();
        Tape tape;
        auto loss = f(tape);
        if (loss->rows != 1 || loss->cols != 1) {
            throw NumericError("finite_diff_check: computation is not scalar-valued");
        }
        if (!std::isfinite(loss->at(0, 0))) {
            throw NumericError("finite_diff_check: computation produced a non-finite value");
        }
        tape.backward(loss);
        analytic.reserve(params.size());
        for (const auto& p : params) analytic.push_back(p->grad);
    }
    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = *params[pi];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double orig = p.values[i];
            p.values[i] = orig + h;
            const double fp = eval_scalar(f);
            p.values[i] = orig - h;
            const double fm = eval_scalar(f);
            p.values[i] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double rel =
                std::abs(analytic[pi][i] - numeric) / std::max(1.0, std::abs(numeric));
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

}  // namespace hvv
