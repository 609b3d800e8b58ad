#include "hvv/attention.hpp"

#include <cmath>

namespace hvv {

TensorPtr self_attend(Tape& tape, const TensorPtr& x, TensorPtr* attn_out) {
    auto scores = tape.affine(tape.matmul(x, tape.transpose(x)), 1.0 / std::sqrt(x->cols), 0.0);
    auto attn = tape.row_softmax(scores);
    if (attn_out) *attn_out = attn;
    return tape.matmul(attn, x);
}

AttnTransform::AttnTransform(int in_dim, int out_dim, Rng& rng) {
    w_ = Tensor2D::make(in_dim, out_dim, true);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (double& v : w_->values) v = rng.normal() * scale;
    b_ = Tensor2D::make(1, out_dim, true);
}

TensorPtr AttnTransform::reduce_attend(Tape& tape, const TensorPtr& x, TensorPtr* attn_out) const {
    auto y = tape.dense(x, w_, b_, Activation::Tanh);
    return self_attend(tape, y, attn_out);
}

}  // namespace hvv
