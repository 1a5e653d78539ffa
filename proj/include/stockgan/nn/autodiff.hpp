#pragma once

#include "stockgan/types.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace stockgan::nn {

class Var;

namespace detail {

struct Node {
    Matrix value;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<Var> inputs;
    // Receives the upstream gradient and the node's own output; returns one
    // gradient per input (an empty Var for inputs that need none). Written in
    // terms of Var ops, so it can itself be differentiated.
    std::function<std::vector<Var>(const Var& grad, const Var& self)> backward;
};

} // namespace detail

// Handle to a node in a dynamically built expression graph. Copies share the
// node. All values are 2-D row-major double matrices.
class Var {
public:
    Var() = default;
    explicit Var(Matrix value, bool requires_grad = false);

    static Var scalar(double value);

    bool defined() const noexcept { return static_cast<bool>(node_); }
    const Matrix& value() const { return node_->value; }
    bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }
    double item() const;
    const char* op() const { return node_->op; }

    // Same value, cut off from the graph.
    Var detach() const;

    const detail::Node* node() const noexcept { return node_.get(); }

    static Var make(Matrix value, const char* op, std::vector<Var> inputs,
                    std::function<std::vector<Var>(const Var&, const Var&)> backward);

private:
    std::shared_ptr<detail::Node> node_;
};

// Graph recording is disabled while a guard is alive (thread-local).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_mode_enabled();

// d(output)/d(wrt[i]) for a 1x1 output. With create_graph the returned
// gradients are themselves differentiable. Inputs that do not influence the
// output receive zeros.
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph = false);

// ---- ops ----
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var mul_const(const Var& a, const Matrix& c);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var add_row(const Var& a, const Var& row);  // broadcast 1 x c over rows
Var sum_rows(const Var& a);                 // column sums -> 1 x c
Var broadcast_rows(const Var& row, Eigen::Index rows);
Var row_sum(const Var& a);                  // r x 1
Var broadcast_cols(const Var& col, Eigen::Index cols);
Var sum_all(const Var& a);                  // 1 x 1
Var mean_all(const Var& a);
Var broadcast_scalar(const Var& s, Eigen::Index rows, Eigen::Index cols);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var square(const Var& a);
Var sqrt(const Var& a);         // derivative taken as 0 where the value is 0
Var reciprocal(const Var& a);   // 0 where the input is 0
Var log(const Var& a);
Var clamp_min(const Var& a, double lo);
Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var pad_cols(const Var& a, Eigen::Index start, Eigen::Index total);
Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols);
// (B*L) x C  ->  (B*L) x (K*C): row b*L+t holds rows b*L+t+k-K/2 for k in [0,K),
// zeros outside each length-L block.
Var im2col(const Var& a, Eigen::Index length, Eigen::Index kernel);
Var col2im(const Var& a, Eigen::Index length, Eigen::Index kernel);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

} // namespace stockgan::nn
