#include "hvv/otke.hpp"

#include <cmath>

#include "hvv/errors.hpp"

namespace hvv {

void OtkeConfig::validate() const {
    if (epsilon <= 0.0) throw ConfigError("otke: epsilon must be > 0");
    if (max_iterations < 1) throw ConfigError("otke: max_iterations must be >= 1");
    if (kernel == KernelKind::Gaussian && sigma <= 0.0) {
        throw ConfigError("otke: gaussian kernel needs sigma > 0");
    }
    if (p < 1) throw ConfigError("otke: reference count must be >= 1");
}

ReferenceSet::ReferenceSet(int p, int dim, Rng& rng) {
    z = Tensor2D::make(p, dim, true);
    for (int i = 0; i < p; ++i) {
        double norm2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double v = rng.normal();
            z->at(i, j) = v;
            norm2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (int j = 0; j < dim; ++j) z->at(i, j) *= inv;
    }
}

namespace {

constexpr double kConvergenceTol = 1e-12;

// Worst row-sum violation for the current scaling-domain state, off tape.
double rowsum_err_scaling(const Tensor2D& G, const Tensor2D& u, const Tensor2D& v, double a) {
    double worst = 0.0;
    for (int i = 0; i < G.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < G.cols; ++j) s += G.at(i, j) * v.at(j, 0);
        worst = std::max(worst, std::abs(u.at(i, 0) * s - a));
    }
    return worst;
}

double rowsum_err_log(const Tensor2D& M, const Tensor2D& f, const Tensor2D& g, double a) {
    double worst = 0.0;
    for (int i = 0; i < M.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < M.cols; ++j) s += std::exp(M.at(i, j) + f.at(i, 0) + g.at(j, 0));
        worst = std::max(worst, std::abs(s - a));
    }
    return worst;
}

}  // namespace

TransportPlan sinkhorn(Tape& tape, const TensorPtr& cost, double epsilon, int max_iterations) {
    if (epsilon <= 0.0) throw ConfigError("sinkhorn: epsilon must be > 0");
    if (max_iterations < 1) throw ConfigError("sinkhorn: max_iterations must be >= 1");
    if (!cost->all_finite()) throw NumericError("sinkhorn: cost matrix has non-finite entries");

    const int n = cost->rows, p = cost->cols;
    const double a = 1.0 / n, b = 1.0 / p;

    double max_abs = 0.0;
    for (double v : cost->values) max_abs = std::max(max_abs, std::abs(v));
    bool use_log = max_abs / epsilon > 30.0;

    TransportPlan plan;
    plan.epsilon = epsilon;

    if (!use_log) {
        const std::size_t mark = tape.size();
        auto G = tape.exp(tape.affine(cost, -1.0 / epsilon, 0.0));
        auto GT = tape.transpose(G);
        TensorPtr u;
        auto v = Tensor2D::full(p, 1, 1.0);
        int iters = 0;
        while (iters < max_iterations) {
            u = tape.cdiv(a, tape.matmul(G, v));
            v = tape.cdiv(b, tape.matmul(GT, u));
            ++iters;
            if (rowsum_err_scaling(*G, *u, *v, a) < kConvergenceTol) break;
        }
        auto T = tape.hadamard(tape.matmul(u, tape.transpose(v)), G);
        if (T->all_finite() && u->all_finite() && v->all_finite()) {
            plan.T = T;
            plan.iterations_run = iters;
            return plan;
        }
        // overflow in the scaling domain: discard and redo in log domain
        tape.truncate(mark);
        use_log = true;
    }

    const double log_a = std::log(a), log_b = std::log(b);
    auto M = tape.affine(cost, -1.0 / epsilon, 0.0);
    auto MT = tape.transpose(M);
    TensorPtr f;
    auto g = Tensor2D::make(p, 1);
    int iters = 0;
    while (iters < max_iterations) {
        f = tape.affine(tape.logsumexp_rows(tape.add_row_broadcast(M, tape.transpose(g))), -1.0,
                        log_a);
        g = tape.affine(tape.logsumexp_rows(tape.add_row_broadcast(MT, tape.transpose(f))), -1.0,
                        log_b);
        ++iters;
        if (rowsum_err_log(*M, *f, *g, a) < kConvergenceTol) break;
    }
    plan.T = tape.exp(tape.add_col_broadcast(tape.add_row_broadcast(M, tape.transpose(g)), f));
    plan.iterations_run = iters;
    return plan;
}

namespace {

// cost C_ij = -<x_i, z_j> for the linear kernel, -k_gauss(x_i, z_j) for the
// Gaussian one.
TensorPtr transport_cost(Tape& tape, const TensorPtr& x, const TensorPtr& z,
                         const OtkeConfig& cfg) {
    auto xz = tape.matmul(x, tape.transpose(z));
    if (cfg.kernel == KernelKind::Linear) {
        return tape.affine(xz, -1.0, 0.0);
    }
    auto xsq = tape.row_sum(tape.hadamard(x, x));
    auto zsq = tape.row_sum(tape.hadamard(z, z));
    auto d2 = tape.add_row_broadcast(tape.add_col_broadcast(tape.affine(xz, -2.0, 0.0), xsq),
                                     tape.transpose(zsq));
    auto k = tape.exp(tape.affine(d2, -1.0 / (2.0 * cfg.sigma * cfg.sigma), 0.0));
    return tape.affine(k, -1.0, 0.0);
}

}  // namespace

TensorPtr otke_pool(Tape& tape, const TensorPtr& x, const ReferenceSet& refs,
                    const OtkeConfig& cfg, TransportPlan* plan_out) {
    cfg.validate();
    if (x->cols != refs.dim()) {
        throw DimError("otke_pool: feature dim " + x->shape_str() + " does not match references " +
                       refs.z->shape_str());
    }
    if (!x->all_finite()) throw NumericError("otke_pool: non-finite input features");
    auto cost = transport_cost(tape, x, refs.z, cfg);
    auto plan = sinkhorn(tape, cost, cfg.epsilon, cfg.max_iterations);
    auto pooled = tape.affine(tape.matmul(tape.transpose(plan.T), x),
                              std::sqrt(static_cast<double>(refs.count())), 0.0);
    if (plan_out) *plan_out = plan;
    return pooled;
}

TensorPtr fuse(Tape& tape, const TensorPtr& a, const TensorPtr& b, const ReferenceSet& refs,
               const OtkeConfig& cfg, TransportPlan* plan_out) {
    if (a->cols != b->cols) {
        throw DimError("fuse: feature dims differ, " + a->shape_str() + " vs " + b->shape_str());
    }
    auto joined = tape.concat({a, b}, ConcatAxis::Rows);
    return otke_pool(tape, joined, refs, cfg, plan_out);
}

double marginal_violation(const Tensor2D& plan) {
    const double a = 1.0 / plan.rows, b = 1.0 / plan.cols;
    double worst = 0.0;
    for (int i = 0; i < plan.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < plan.cols; ++j) s += plan.at(i, j);
        worst = std::max(worst, std::abs(s - a));
    }
    for (int j = 0; j < plan.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < plan.rows; ++i) s += plan.at(i, j);
        worst = std::max(worst, std::abs(s - b));
    }
    return worst;
}

}  // namespace hvv
