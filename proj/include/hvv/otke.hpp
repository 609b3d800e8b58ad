#pragma once

#include "hvv/rng.hpp"
#include "hvv/tensor.hpp"

namespace hvv {

enum class KernelKind { Linear, Gaussian };

struct OtkeConfig {
    double epsilon = 0.1;
    int max_iterations = 30;
    KernelKind kernel = KernelKind::Linear;
    double sigma = 1.0;  // Gaussian bandwidth
    int p = 32;          // reference count; defaults to the text length

    void validate() const;
};

// Trainable reference set the input features are transported onto.
// Rows are initialized unit-norm from a seeded Gaussian.
struct ReferenceSet {
    TensorPtr z;  // p x dim

    ReferenceSet(int p, int dim, Rng& rng);
    int count() const { return z->rows; }
    int dim() const { return z->cols; }
};

// Entropic OT coupling between uniform marginals (1/n over inputs, 1/p over
// references). Row sums are 1/n and column sums 1/p up to the convergence
// tolerance of the solver.
struct TransportPlan {
    TensorPtr T;  // n x p, nonnegative
    double epsilon = 0.0;
    int iterations_run = 0;
};

// Solves entropy-regularized OT between uniform marginals by alternating
// row/column scaling of exp(-cost/epsilon), unrolled on the tape so gradients
// flow back to cost. Runs in the scaling domain when safe; switches to the
// log domain whenever any |cost|/epsilon > 30 or the scaling domain produces
// non-finite values. Stops before max_iterations once the worst marginal
// violation drops below 1e-12.
TransportPlan sinkhorn(Tape& tape, const TensorPtr& cost, double epsilon, int max_iterations);

// Transport-weighted pooling of the input set onto the reference set:
// output row j = sqrt(p) * sum_i T_ij * x_i.  The Gaussian kernel shapes the
// transport cost only; pooled features stay in input space. plan_out, when
// non-null, receives the plan.
TensorPtr otke_pool(Tape& tape, const TensorPtr& x, const ReferenceSet& refs,
                    const OtkeConfig& cfg, TransportPlan* plan_out = nullptr);

// Concatenates two sets along the set axis and pools the union.
TensorPtr fuse(Tape& tape, const TensorPtr& a, const TensorPtr& b, const ReferenceSet& refs,
               const OtkeConfig& cfg, TransportPlan* plan_out = nullptr);

// Max over rows and columns of |row sums - 1/n| and |col sums - 1/p|.
double marginal_violation(const Tensor2D& plan);

}  // namespace hvv
