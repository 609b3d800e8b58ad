#include "hvv/optimizer.hpp"

#include <cmath>

#include "hvv/errors.hpp"

namespace hvv {

AdamState AdamState::init(const std::vector<TensorPtr>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const auto& p : params) {
        s.m.emplace_back(p->size(), 0.0);
        s.v.emplace_back(p->size(), 0.0);
    }
    return s;
}

void adam_step(const std::vector<TensorPtr>& params, AdamState& state, const AdamConfig& cfg,
               long t) {
    if (t < 1) throw ValidationError("adam_step: step index must be >= 1");
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ValidationError("adam_step: state does not match parameter list");
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = *params[pi];
        auto& m = state.m[pi];
        auto& v = state.v[pi];
        if (m.size() != p.size()) {
            throw ValidationError("adam_step: state shape mismatch at parameter " +
                                  std::to_string(pi));
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (cfg.weight_decay != 0.0) p.values[i] -= cfg.lr * cfg.weight_decay * p.values[i];
            const double g = p.grad[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.values[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace hvv
