#pragma once

#include "hvv/rng.hpp"
#include "hvv/tensor.hpp"

namespace hvv {

// Plain scaled self-attention over the rows of x: row_softmax(x x^T / sqrt(cols)) * x.
// Row count is preserved. attn_out, when non-null, receives the attention matrix.
TensorPtr self_attend(Tape& tape, const TensorPtr& x, TensorPtr* attn_out = nullptr);

// Dimensionality reduction (dense + tanh) followed by self-attention, the
// transform applied to each representation before fusion.
class AttnTransform {
public:
    AttnTransform(int in_dim, int out_dim, Rng& rng);

    // x: n x in_dim -> n x out_dim
    TensorPtr reduce_attend(Tape& tape, const TensorPtr& x, TensorPtr* attn_out = nullptr) const;

    int in_dim() const { return w_->rows; }
    int out_dim() const { return w_->cols; }
    const TensorPtr& weight() const { return w_; }
    const TensorPtr& bias() const { return b_; }

private:
    TensorPtr w_;
    TensorPtr b_;
};

}  // namespace hvv
