#include "hvv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hvv/errors.hpp"

namespace hvv {

Tensor2D::Tensor2D(int r, int c, bool rg)
    : rows(r),
      cols(c),
      values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0),
      grad(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0),
      requires_grad(rg) {
    if (r <= 0 || c <= 0) {
        throw DimError("Tensor2D: dimensions must be positive, got " + std::to_string(r) +
                       "x" + std::to_string(c));
    }
}

void Tensor2D::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

bool Tensor2D::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor2D::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

TensorPtr Tensor2D::make(int r, int c, bool rg) { return std::make_shared<Tensor2D>(r, c, rg); }

TensorPtr Tensor2D::full(int r, int c, double v, bool rg) {
    auto t = make(r, c, rg);
    std::fill(t->values.begin(), t->values.end(), v);
    return t;
}

TensorPtr Tensor2D::from(std::initializer_list<std::initializer_list<double>> vals, bool rg) {
    int r = static_cast<int>(vals.size());
    int c = r > 0 ? static_cast<int>(vals.begin()->size()) : 0;
    auto t = make(r, c, rg);
    int i = 0;
    for (const auto& row : vals) {
        if (static_cast<int>(row.size()) != c) {
            throw DimError("Tensor2D::from: ragged rows");
        }
        int j = 0;
        for (double v : row) t->at(i, j++) = v;
        ++i;
    }
    return t;
}

TensorPtr Tensor2D::from_rows(int r, int c, std::vector<double> flat, bool rg) {
    if (flat.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {
        throw DimError("Tensor2D::from_rows: flat size does not match " + std::to_string(r) +
                       "x" + std::to_string(c));
    }
    auto t = make(r, c, rg);
    t->values = std::move(flat);
    return t;
}

TensorPtr Tape::out_like(int r, int c, bool rg) { return Tensor2D::make(r, c, rg); }

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols != b->rows) {
        throw DimError("matmul: inner dimensions differ, " + a->shape_str() + " * " +
                       b->shape_str());
    }
    const int n = a->rows, k = a->cols, m = b->cols;
    auto y = out_like(n, m, a->requires_grad || b->requires_grad);
    for (int i = 0; i < n; ++i) {
        const double* arow = &a->values[static_cast<std::size_t>(i) * k];
        double* yrow = &y->values[static_cast<std::size_t>(i) * m];
        for (int kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = &b->values[static_cast<std::size_t>(kk) * m];
            for (int j = 0; j < m; ++j) yrow[j] += av * brow[j];
        }
    }
    if (y->requires_grad) {
        record([a, b, y, n, k, m] {
            if (a->requires_grad) {
                // dA += dY * B^T
                for (int i = 0; i < n; ++i) {
                    const double* gyrow = &y->grad[static_cast<std::size_t>(i) * m];
                    double* garow = &a->grad[static_cast<std::size_t>(i) * k];
                    for (int kk = 0; kk < k; ++kk) {
                        const double* brow = &b->values[static_cast<std::size_t>(kk) * m];
                        double acc = 0.0;
                        for (int j = 0; j < m; ++j) acc += gyrow[j] * brow[j];
                        garow[kk] += acc;
                    }
                }
            }
            if (b->requires_grad) {
                // dB += A^T * dY
                for (int i = 0; i < n; ++i) {
                    const double* arow = &a->values[static_cast<std::size_t>(i) * k];
                    const double* gyrow = &y->grad[static_cast<std::size_t>(i) * m];
                    for (int kk = 0; kk < k; ++kk) {
                        const double av = arow[kk];
                        if (av == 0.0) continue;
                        double* gbrow = &b->grad[static_cast<std::size_t>(kk) * m];
                        for (int j = 0; j < m; ++j) gbrow[j] += av * gyrow[j];
                    }
                }
            }
        });
    }
    return y;
}

TensorPtr Tape::transpose(const TensorPtr& x) {
    auto y = out_like(x->cols, x->rows, x->requires_grad);
    for (int i = 0; i < x->rows; ++i)
        for (int j = 0; j < x->cols; ++j) y->at(j, i) = x->at(i, j);
    if (y->requires_grad) {
        record([x, y] {
            for (int i = 0; i < x->rows; ++i)
                for (int j = 0; j < x->cols; ++j) x->grad_at(i, j) += y->grad_at(j, i);
        });
    }
    return y;
}

TensorPtr Tape::add(const TensorPtr& a, const TensorPtr& b) {
    if (a->rows != b->rows || a->cols != b->cols) {
        throw DimError("add: shape mismatch, " + a->shape_str() + " vs " + b->shape_str());
    }
    auto y = out_like(a->rows, a->cols, a->requires_grad || b->requires_grad);
    for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = a->values[i] + b->values[i];
    if (y->requires_grad) {
        record([a, b, y] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < y->size(); ++i) a->grad[i] += y->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < y->size(); ++i) b->grad[i] += y->grad[i];
        });
    }
    return y;
}

TensorPtr Tape::affine(const TensorPtr& x, double k, double c) {
    auto y = out_like(x->rows, x->cols, x->requires_grad);
    for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = k * x->values[i] + c;
    if (y->requires_grad) {
        record([x, y, k] {
            for (std::size_t i = 0; i < y->size(); ++i) x->grad[i] += k * y->grad[i];
        });
    }
    return y;
}

TensorPtr Tape::hadamard(const TensorPtr& a, const TensorPtr& b) {
    if (a->rows != b->rows || a->cols != b->cols) {
        throw DimError("hadamard: shape mismatch, " + a->shape_str() + " vs " + b->shape_str());
    }
    auto y = out_like(a->rows, a->cols, a->requires_grad || b->requires_grad);
    for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = a->values[i] * b->values[i];
    if (y->requires_grad) {
        record([a, b, y] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < y->size(); ++i) a->grad[i] += b->values[i] * y->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < y->size(); ++i) b->grad[i] += a->values[i] * y->grad[i];
        });
    }
    return y;
}

TensorPtr Tape::cdiv(double c, const TensorPtr& x) {
    auto y = out_like(x->rows, x->cols, x->requires_grad);
    for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = c / x->values[i];
    if (y->requires_grad) {
        record([x, y, c] {
            for (std::size_t i = 0; i < y->size(); ++i) {
                const double xv = x->values[i];
                x->grad[i] += -c / (xv * xv) * y->grad[i];
            }
        });
    }
    return y;
}

TensorPtr Tape::exp(const TensorPtr& x) {
    auto y = out_like(x->rows, x->cols, x->requires_grad);
    for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = std::exp(x->values[i]);
    if (y->requires_grad) {
        record([x, y] {
            for (std::size_t i = 0; i < y->size(); ++i) x->grad[i] += y->values[i] * y->grad[i];
        });
    }
    return y;
}

TensorPtr Tape::tanh(const TensorPtr& x) {
    auto y = out_like(x->rows, x->cols, x->requires_grad);
    for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = std::tanh(x->values[i]);
    if (y->requires_grad) {
        record([x, y] {
            for (std::size_t i = 0; i < y->size(); ++i) {
                const double t = y->values[i];
                x->grad[i] += (1.0 - t * t) * y->grad[i];
            }
        });
    }
    return y;
}

TensorPtr Tape::relu(const TensorPtr& x) {
    auto y = out_like(x->rows, x->cols, x->requires_grad);
    for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = x->values[i] > 0.0 ? x->values[i] : 0.0;
    if (y->requires_grad) {
        record([x, y] {
            for (std::size_t i = 0; i < y->size(); ++i)
                if (x->values[i] > 0.0) x->grad[i] += y->grad[i];
        });
    }
    return y;
}

TensorPtr Tape::row_softmax(const TensorPtr& x) {
    auto y = out_like(x->rows, x->cols, x->requires_grad);
    for (int i = 0; i < x->rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < x->cols; ++j) mx = std::max(mx, x->at(i, j));
        double sum = 0.0;
        for (int j = 0; j < x->cols; ++j) {
            const double e = std::exp(x->at(i, j) - mx);
            y->at(i, j) = e;
            sum += e;
        }
        for (int j = 0; j < x->cols; ++j) y->at(i, j) /= sum;
    }
    if (y->requires_grad) {
        record([x, y] {
            for (int i = 0; i < x->rows; ++i) {
                double dot = 0.0;
                for (int j = 0; j < x->cols; ++j) dot += y->grad_at(i, j) * y->at(i, j);
                for (int j = 0; j < x->cols; ++j)
                    x->grad_at(i, j) += y->at(i, j) * (y->grad_at(i, j) - dot);
            }
        });
    }
    return y;
}

TensorPtr Tape::logsumexp_rows(const TensorPtr& x) {
    auto y = out_like(x->rows, 1, x->requires_grad);
    for (int i = 0; i < x->rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < x->cols; ++j) mx = std::max(mx, x->at(i, j));
        double sum = 0.0;
        for (int j = 0; j < x->cols; ++j) sum += std::exp(x->at(i, j) - mx);
        y->at(i, 0) = mx + std::log(sum);
    }
    if (y->requires_grad) {
        record([x, y] {
            for (int i = 0; i < x->rows; ++i) {
                const double g = y->grad_at(i, 0);
                if (g == 0.0) continue;
                const double lse = y->at(i, 0);
                for (int j = 0; j < x->cols; ++j)
                    x->grad_at(i, j) += g * std::exp(x->at(i, j) - lse);
            }
        });
    }
    return y;
}

TensorPtr Tape::row_sum(const TensorPtr& x) {
    auto y = out_like(x->rows, 1, x->requires_grad);
    for (int i = 0; i < x->rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < x->cols; ++j) s += x->at(i, j);
        y->at(i, 0) = s;
    }
    if (y->requires_grad) {
        record([x, y] {
            for (int i = 0; i < x->rows; ++i) {
                const double g = y->grad_at(i, 0);
                for (int j = 0; j < x->cols; ++j) x->grad_at(i, j) += g;
            }
        });
    }
    return y;
}

TensorPtr Tape::add_row_broadcast(const TensorPtr& x, const TensorPtr& r) {
    if (r->rows != 1 || r->cols != x->cols) {
        throw DimError("add_row_broadcast: bias must be 1x" + std::to_string(x->cols) +
                       ", got " + r->shape_str());
    }
    auto y = out_like(x->rows, x->cols, x->requires_grad || r->requires_grad);
    for (int i = 0; i < x->rows; ++i)
        for (int j = 0; j < x->cols; ++j) y->at(i, j) = x->at(i, j) + r->at(0, j);
    if (y->requires_grad) {
        record([x, r, y] {
            if (x->requires_grad)
                for (std::size_t i = 0; i < y->size(); ++i) x->grad[i] += y->grad[i];
            if (r->requires_grad)
                for (int i = 0; i < y->rows; ++i)
                    for (int j = 0; j < y->cols; ++j) r->grad_at(0, j) += y->grad_at(i, j);
        });
    }
    return y;
}

TensorPtr Tape::add_col_broadcast(const TensorPtr& x, const TensorPtr& c) {
    if (c->cols != 1 || c->rows != x->rows) {
        throw DimError("add_col_broadcast: column must be " + std::to_string(x->rows) +
                       "x1, got " + c->shape_str());
    }
    auto y = out_like(x->rows, x->cols, x->requires_grad || c->requires_grad);
    for (int i = 0; i < x->rows; ++i)
        for (int j = 0; j < x->cols; ++j) y->at(i, j) = x->at(i, j) + c->at(i, 0);
    if (y->requires_grad) {
        record([x, c, y] {
            if (x->requires_grad)
                for (std::size_t i = 0; i < y->size(); ++i) x->grad[i] += y->grad[i];
            if (c->requires_grad)
                for (int i = 0; i < y->rows; ++i)
                    for (int j = 0; j < y->cols; ++j) c->grad_at(i, 0) += y->grad_at(i, j);
        });
    }
    return y;
}

TensorPtr Tape::concat(const std::vector<TensorPtr>& inputs, ConcatAxis axis) {
    if (inputs.empty()) throw DimError("concat: no inputs");
    bool rg = false;
    int rows = 0, cols = 0;
    if (axis == ConcatAxis::Rows) {
        cols = inputs[0]->cols;
        for (const auto& t : inputs) {
            if (t->cols != cols) {
                throw DimError("concat rows: column counts differ, " + t->shape_str() +
                               " vs expected cols " + std::to_string(cols));
            }
            rows += t->rows;
            rg = rg || t->requires_grad;
        }
    } else {
        rows = inputs[0]->rows;
        for (const auto& t : inputs) {
            if (t->rows != rows) {
                throw DimError("concat cols: row counts differ, " + t->shape_str() +
                               " vs expected rows " + std::to_string(rows));
            }
            cols += t->cols;
            rg = rg || t->requires_grad;
        }
    }
    auto y = out_like(rows, cols, rg);
    if (axis == ConcatAxis::Rows) {
        int r0 = 0;
        for (const auto& t : inputs) {
            std::copy(t->values.begin(), t->values.end(),
                      y->values.begin() + static_cast<std::size_t>(r0) * cols);
            r0 += t->rows;
        }
    } else {
        int c0 = 0;
        for (const auto& t : inputs) {
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < t->cols; ++j) y->at(i, c0 + j) = t->at(i, j);
            c0 += t->cols;
        }
    }
    if (rg) {
        auto ins = inputs;
        record([ins, y, axis] {
            if (axis == ConcatAxis::Rows) {
                int r0 = 0;
                for (const auto& t : ins) {
                    if (t->requires_grad) {
                        for (int i = 0; i < t->rows; ++i)
                            for (int j = 0; j < t->cols; ++j)
                                t->grad_at(i, j) += y->grad_at(r0 + i, j);
                    }
                    r0 += t->rows;
                }
            } else {
                int c0 = 0;
                for (const auto& t : ins) {
                    if (t->requires_grad) {
                        for (int i = 0; i < t->rows; ++i)
                            for (int j = 0; j < t->cols; ++j)
                                t->grad_at(i, j) += y->grad_at(i, c0 + j);
                    }
                    c0 += t->cols;
                }
            }
        });
    }
    return y;
}

TensorPtr Tape::pool(const TensorPtr& x, PoolMode mode) {
    if (x->rows < 1) throw DimError("pool: needs at least one row");
    auto y = out_like(1, x->cols, x->requires_grad);
    if (mode == PoolMode::MeanRows) {
        for (int j = 0; j < x->cols; ++j) {
            double s = 0.0;
            for (int i = 0; i < x->rows; ++i) s += x->at(i, j);
            y->at(0, j) = s / x->rows;
        }
        if (y->requires_grad) {
            record([x, y] {
                const double inv = 1.0 / x->rows;
                for (int j = 0; j < x->cols; ++j) {
                    const double g = y->grad_at(0, j) * inv;
                    for (int i = 0; i < x->rows; ++i) x->grad_at(i, j) += g;
                }
            });
        }
    } else {
        // first argmax row receives the gradient
        std::vector<int> arg(static_cast<std::size_t>(x->cols), 0);
        for (int j = 0; j < x->cols; ++j) {
            double best = x->at(0, j);
            int bi = 0;
            for (int i = 1; i < x->rows; ++i) {
                if (x->at(i, j) > best) {
                    best = x->at(i, j);
                    bi = i;
                }
            }
            y->at(0, j) = best;
            arg[static_cast<std::size_t>(j)] = bi;
        }
        if (y->requires_grad) {
            record([x, y, arg] {
                for (int j = 0; j < x->cols; ++j)
                    x->grad_at(arg[static_cast<std::size_t>(j)], j) += y->grad_at(0, j);
            });
        }
    }
    return y;
}

TensorPtr Tape::dense(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b,
                      Activation act) {
    if (x->cols != w->rows) {
        throw DimError("dense: input cols " + x->shape_str() + " do not match weight rows " +
                       w->shape_str());
    }
    if (b->rows != 1 || b->cols != w->cols) {
        throw DimError("dense: bias must be 1x" + std::to_string(w->cols) + ", got " +
                       b->shape_str());
    }
    auto z = add_row_broadcast(matmul(x, w), b);
    switch (act) {
        case Activation::Tanh: return tanh(z);
        case Activation::Relu: return relu(z);
        case Activation::None: return z;
    }
    return z;
}

TensorPtr Tape::cross_entropy(const TensorPtr& logits, const std::vector<int>& labels,
                              const std::vector<double>& class_weights) {
    const int n = logits->rows, c = logits->cols;
    if (n < 1) throw DimError("cross_entropy: needs at least one row");
    if (static_cast<int>(labels.size()) != n) {
        throw ValidationError("cross_entropy: " + std::to_string(labels.size()) +
                              " labels for " + std::to_string(n) + " logit rows");
    }
    for (int lab : labels) {
        if (lab < 0 || lab >= c) {
            throw ValidationError("cross_entropy: label " + std::to_string(lab) +
                                  " out of range [0," + std::to_string(c) + ")");
        }
    }
    if (!class_weights.empty() && static_cast<int>(class_weights.size()) != c) {
        throw ValidationError("cross_entropy: class_weights size must equal class count");
    }
    auto y = out_like(1, 1, logits->requires_grad);
    std::vector<double> lse(static_cast<std::size_t>(n));
    double total = 0.0, wsum = 0.0;
    for (int i = 0; i < n; ++i) {
        double mx = logits->at(i, 0);
        for (int j = 1; j < c; ++j) mx = std::max(mx, logits->at(i, j));
        double s = 0.0;
        for (int j = 0; j < c; ++j) s += std::exp(logits->at(i, j) - mx);
        lse[static_cast<std::size_t>(i)] = mx + std::log(s);
        const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        total += w * (lse[static_cast<std::size_t>(i)] - logits->at(i, labels[static_cast<std::size_t>(i)]));
        wsum += w;
    }
    y->at(0, 0) = total / wsum;
    if (y->requires_grad) {
        record([logits, y, labels, class_weights, lse, wsum] {
            const double g = y->grad_at(0, 0);
            const int n2 = logits->rows, c2 = logits->cols;
            for (int i = 0; i < n2; ++i) {
                const int lab = labels[static_cast<std::size_t>(i)];
                const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(lab)];
                for (int j = 0; j < c2; ++j) {
                    const double sm = std::exp(logits->at(i, j) - lse[static_cast<std::size_t>(i)]);
                    const double onehot = (j == lab) ? 1.0 : 0.0;
                    logits->grad_at(i, j) += g * w * (sm - onehot) / wsum;
                }
            }
        });
    }
    return y;
}

TensorPtr Tape::sum_all(const TensorPtr& x) {
    auto y = out_like(1, 1, x->requires_grad);
    double s = 0.0;
    for (double v : x->values) s += v;
    y->at(0, 0) = s;
    if (y->requires_grad) {
        record([x, y] {
            const double g = y->grad_at(0, 0);
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += g;
        });
    }
    return y;
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->rows != 1 || loss->cols != 1) {
        throw DimError("backward: loss must be 1x1, got " + loss->shape_str());
    }
    loss->grad[0] = 1.0;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

void Tape::truncate(std::size_t n) {
    if (n < steps_.size()) steps_.resize(n);
}

std::vector<double> softmax_row(const std::vector<double>& logits) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> out(logits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        s += out[i];
    }
    for (double& v : out) v /= s;
    return out;
}

}  // namespace hvv
