#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace hvv {

struct Tensor2D;
using TensorPtr = std::shared_ptr<Tensor2D>;

// Dense row-major matrix with a gradient buffer of identical shape.
struct Tensor2D {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;

    Tensor2D(int r, int c, bool rg);

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    double& grad_at(int r, int c) { return grad[static_cast<std::size_t>(r) * cols + c]; }
    double grad_at(int r, int c) const { return grad[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return values.size(); }
    void zero_grad();
    bool all_finite() const;
    std::string shape_str() const;

    static TensorPtr make(int r, int c, bool rg = false);
    static TensorPtr full(int r, int c, double v, bool rg = false);
    static TensorPtr from(std::initializer_list<std::initializer_list<double>> vals,
                          bool rg = false);
    static TensorPtr from_rows(int r, int c, std::vector<double> flat, bool rg = false);
};

enum class Activation { None, Tanh, Relu };
enum class ConcatAxis { Rows, Cols };
enum class PoolMode { MeanRows, MaxRows };

// Records the forward pass of every differentiable op; backward() replays the
// recorded rules in reverse. One tape per training worker; reset between
// optimizer steps.
class Tape {
public:
    TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
    TensorPtr transpose(const TensorPtr& x);
    TensorPtr add(const TensorPtr& a, const TensorPtr& b);
    // y = k * x + c, elementwise with scalar constants
    TensorPtr affine(const TensorPtr& x, double k, double c);
    TensorPtr hadamard(const TensorPtr& a, const TensorPtr& b);
    // y = c / x, elementwise
    TensorPtr cdiv(double c, const TensorPtr& x);
    TensorPtr exp(const TensorPtr& x);
    TensorPtr tanh(const TensorPtr& x);
    TensorPtr relu(const TensorPtr& x);
    TensorPtr row_softmax(const TensorPtr& x);
    // per-row log(sum(exp(row))) -> rows x 1
    TensorPtr logsumexp_rows(const TensorPtr& x);
    TensorPtr row_sum(const TensorPtr& x);
    // y_ij = x_ij + r_0j, r is 1 x cols
    TensorPtr add_row_broadcast(const TensorPtr& x, const TensorPtr& r);
    // y_ij = x_ij + c_i0, c is rows x 1
    TensorPtr add_col_broadcast(const TensorPtr& x, const TensorPtr& c);
    TensorPtr concat(const std::vector<TensorPtr>& inputs, ConcatAxis axis);
    TensorPtr pool(const TensorPtr& x, PoolMode mode);
    // activation(x * w + b); b is 1 x w.cols broadcast over rows
    TensorPtr dense(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b,
                    Activation act);
    // mean over instances of -log softmax(logits)[label]; returns 1x1.
    // class_weights, when non-empty, must have logits.cols entries; the mean
    // becomes a weighted mean (sum w_y * nll / sum w_y).
    TensorPtr cross_entropy(const TensorPtr& logits, const std::vector<int>& labels,
                            const std::vector<double>& class_weights = {});
    TensorPtr sum_all(const TensorPtr& x);

    // Seeds grad of loss (must be 1x1) with 1 and replays recorded rules in
    // reverse order. Gradients accumulate into every tensor that
    // requires_grad.
    void backward(const TensorPtr& loss);

    std::size_t size() const { return steps_.size(); }
    void reset() { steps_.clear(); }
    // Drop ops recorded after an abandoned sub-computation.
    void truncate(std::size_t n);

private:
    std::vector<std::function<void()>> steps_;

    void record(std::function<void()> fn) { steps_.push_back(std::move(fn)); }
    static TensorPtr out_like(int r, int c, bool rg);
};

// Softmax of a single row vector, outside any tape. Used by predict paths.
std::vector<double> softmax_row(const std::vector<double>& logits);

}  // namespace hvv
