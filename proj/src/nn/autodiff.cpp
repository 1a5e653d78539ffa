#include "stockgan/nn/autodiff.hpp"

#include "stockgan/errors.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace stockgan::nn {

namespace {

thread_local bool g_grad_enabled = true;

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    }
}

Var constant(Matrix m) { return Var(std::move(m), false); }

} // namespace

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<detail::Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

Var Var::scalar(double value) {
    Matrix m(1, 1);
    m(0, 0) = value;
    return Var(std::move(m));
}

double Var::item() const {
    if (rows() != 1 || cols() != 1) {
        throw ShapeError("item() on a non-scalar");
    }
    return node_->value(0, 0);
}

Var Var::detach() const { return Var(node_->value, false); }

Var Var::make(Matrix value, const char* op, std::vector<Var> inputs,
              std::function<std::vector<Var>(const Var&, const Var&)> backward) {
    Var out;
    out.node_ = std::make_shared<detail::Node>();
    out.node_->value = std::move(value);
    out.node_->op = op;
    bool needs = false;
    if (g_grad_enabled) {
        for (const auto& in : inputs) needs = needs || in.requires_grad();
    }
    if (needs) {
        out.node_->requires_grad = true;
        out.node_->inputs = std::move(inputs);
        out.node_->backward = std::move(backward);
    }
    return out;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_mode_enabled() { return g_grad_enabled; }

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph) {
    if (output.rows() != 1 || output.cols() != 1) {
        throw ShapeError("grad: output must be a scalar");
    }

    // Iterative post-order DFS over nodes that carry gradient.
    std::vector<Var> order;
    std::unordered_set<const detail::Node*> visited;
    if (output.requires_grad()) {
        std::vector<std::pair<Var, std::size_t>> stack;
        stack.emplace_back(output, 0);
        visited.insert(output.node());
        while (!stack.empty()) {
            auto& [var, next] = stack.back();
            const auto& inputs = var.node()->inputs;
            if (next < inputs.size()) {
                const Var child = inputs[next++];
                if (child.requires_grad() && visited.insert(child.node()).second) {
                    stack.emplace_back(child, 0);
                }
            } else {
                order.push_back(var);
                stack.pop_back();
            }
        }
    }

    std::unordered_map<const detail::Node*, Var> grads;
    {
        std::unique_ptr<NoGradGuard> guard;
        if (!create_graph) guard = std::make_unique<NoGradGuard>();
        if (output.requires_grad()) grads[output.node()] = Var::scalar(1.0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const Var& var = *it;
            const detail::Node* node = var.node();
            auto found = grads.find(node);
            if (found == grads.end() || !node->backward) continue;
            const Var upstream = found->second;
            const auto input_grads = node->backward(upstream, var);
            for (std::size_t i = 0; i < node->inputs.size(); ++i) {
                const Var& in = node->inputs[i];
                if (!in.requires_grad() || i >= input_grads.size() || !input_grads[i].defined()) {
                    continue;
                }
                auto slot = grads.find(in.node());
                if (slot == grads.end()) {
                    grads.emplace(in.node(), input_grads[i]);
                } else {
                    slot->second = add(slot->second, input_grads[i]);
                }
            }
        }
    }

    std::vector<Var> result;
    result.reserve(wrt.size());
    for (const auto& w : wrt) {
        auto found = grads.find(w.node());
        if (found != grads.end() && w.requires_grad()) {
            result.push_back(found->second);
        } else {
            result.push_back(constant(Matrix::Zero(w.rows(), w.cols())));
        }
    }
    return result;
}

Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    out.noalias() = a.value() * b.value();
    return Var::make(std::move(out), "matmul", {a, b}, [a, b](const Var& g, const Var&) {
        return std::vector<Var>{a.requires_grad() ? matmul(g, transpose(b)) : Var{},
                                b.requires_grad() ? matmul(transpose(a), g) : Var{}};
    });
}

Var transpose(const Var& a) {
    Matrix out = a.value().transpose();
    return Var::make(std::move(out), "transpose", {a},
                     [](const Var& g, const Var&) { return std::vector<Var>{transpose(g)}; });
}

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    Matrix out = a.value() + b.value();
    return Var::make(std::move(out), "add", {a, b},
                     [](const Var& g, const Var&) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a, b, "sub");
    Matrix out = a.value() - b.value();
    return Var::make(std::move(out), "sub", {a, b}, [b](const Var& g, const Var&) {
        return std::vector<Var>{g, b.requires_grad() ? scale(g, -1.0) : Var{}};
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    Matrix out = a.value().cwiseProduct(b.value());
    return Var::make(std::move(out), "mul", {a, b}, [a, b](const Var& g, const Var&) {
        return std::vector<Var>{a.requires_grad() ? mul(g, b) : Var{},
                                b.requires_grad() ? mul(g, a) : Var{}};
    });
}

Var mul_const(const Var& a, const Matrix& c) {
    if (a.rows() != c.rows() || a.cols() != c.cols()) {
        throw ShapeError("mul_const: shape mismatch");
    }
    Matrix out = a.value().cwiseProduct(c);
    return Var::make(std::move(out), "mul_const", {a}, [c](const Var& g, const Var&) {
        return std::vector<Var>{mul_const(g, c)};
    });
}

Var scale(const Var& a, double s) {
    Matrix out = a.value() * s;
    return Var::make(std::move(out), "scale", {a},
                     [s](const Var& g, const Var&) { return std::vector<Var>{scale(g, s)}; });
}

Var add_scalar(const Var& a, double s) {
    Matrix out = a.value().array() + s;
    return Var::make(std::move(out), "add_scalar", {a},
                     [](const Var& g, const Var&) { return std::vector<Var>{g}; });
}

Var add_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) {
        throw ShapeError("add_row: bias is " + std::to_string(row.rows()) + "x" +
                         std::to_string(row.cols()) + ", expected 1x" + std::to_string(a.cols()));
    }
    Matrix out = a.value();
    out.rowwise() += row.value().row(0);
    return Var::make(std::move(out), "add_row", {a, row}, [row](const Var& g, const Var&) {
        return std::vector<Var>{g, row.requires_grad() ? sum_rows(g) : Var{}};
    });
}

Var sum_rows(const Var& a) {
    Matrix out = a.value().colwise().sum();
    const Eigen::Index rows = a.rows();
    return Var::make(std::move(out), "sum_rows", {a}, [rows](const Var& g, const Var&) {
        return std::vector<Var>{broadcast_rows(g, rows)};
    });
}

Var broadcast_rows(const Var& row, Eigen::Index rows) {
    if (row.rows() != 1) throw ShapeError("broadcast_rows: expected a row vector");
    Matrix out = row.value().replicate(rows, 1);
    return Var::make(std::move(out), "broadcast_rows", {row},
                     [](const Var& g, const Var&) { return std::vector<Var>{sum_rows(g)}; });
}

Var row_sum(const Var& a) {
    Matrix out = a.value().rowwise().sum();
    const Eigen::Index cols = a.cols();
    return Var::make(std::move(out), "row_sum", {a}, [cols](const Var& g, const Var&) {
        return std::vector<Var>{broadcast_cols(g, cols)};
    });
}

Var broadcast_cols(const Var& col, Eigen::Index cols) {
    if (col.cols() != 1) throw ShapeError("broadcast_cols: expected a column vector");
    Matrix out = col.value().replicate(1, cols);
    return Var::make(std::move(out), "broadcast_cols", {col},
                     [](const Var& g, const Var&) { return std::vector<Var>{row_sum(g)}; });
}

Var sum_all(const Var& a) {
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    const Eigen::Index r = a.rows();
    const Eigen::Index c = a.cols();
    return Var::make(std::move(out), "sum_all", {a}, [r, c](const Var& g, const Var&) {
        return std::vector<Var>{broadcast_scalar(g, r, c)};
    });
}

Var mean_all(const Var& a) {
    const auto n = static_cast<double>(a.rows() * a.cols());
    if (n == 0.0) throw ShapeError("mean_all: empty input");
    return scale(sum_all(a), 1.0 / n);
}

Var broadcast_scalar(const Var& s, Eigen::Index rows, Eigen::Index cols) {
    Matrix out = Matrix::Constant(rows, cols, s.item());
    return Var::make(std::move(out), "broadcast_scalar", {s},
                     [](const Var& g, const Var&) { return std::vector<Var>{sum_all(g)}; });
}

Var sigmoid(const Var& a) {
    Matrix out = a.value().unaryExpr([](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    });
    return Var::make(std::move(out), "sigmoid", {a}, [](const Var& g, const Var& y) {
        // s' = s (1 - s)
        return std::vector<Var>{mul(g, mul(y, add_scalar(scale(y, -1.0), 1.0)))};
    });
}

Var tanh(const Var& a) {
    Matrix out = a.value().array().tanh();
    return Var::make(std::move(out), "tanh", {a}, [](const Var& g, const Var& y) {
        return std::vector<Var>{mul(g, add_scalar(scale(square(y), -1.0), 1.0))};
    });
}

Var leaky_relu(const Var& a, double slope) {
    Matrix mask = a.value().unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
    Matrix out = a.value().cwiseProduct(mask);
    return Var::make(std::move(out), "leaky_relu", {a}, [mask = std::move(mask)](const Var& g, const Var&) {
        return std::vector<Var>{mul_const(g, mask)};
    });
}

Var square(const Var& a) {
    Matrix out = a.value().cwiseProduct(a.value());
    return Var::make(std::move(out), "square", {a}, [a](const Var& g, const Var&) {
        return std::vector<Var>{mul(g, scale(a, 2.0))};
    });
}

Var sqrt(const Var& a) {
    if ((a.value().array() < 0.0).any()) {
        throw NumericError("sqrt: negative input");
    }
    Matrix out = a.value().cwiseSqrt();
    return Var::make(std::move(out), "sqrt", {a}, [](const Var& g, const Var& y) {
        return std::vector<Var>{mul(g, scale(reciprocal(y), 0.5))};
    });
}

Var reciprocal(const Var& a) {
    Matrix out = a.value().unaryExpr([](double x) { return x == 0.0 ? 0.0 : 1.0 / x; });
    return Var::make(std::move(out), "reciprocal", {a}, [](const Var& g, const Var& y) {
        return std::vector<Var>{scale(mul(g, square(y)), -1.0)};
    });
}

Var log(const Var& a) {
    if ((a.value().array() <= 0.0).any()) {
        throw NumericError("log: non-positive input");
    }
    Matrix out = a.value().array().log();
    return Var::make(std::move(out), "log", {a}, [a](const Var& g, const Var&) {
        return std::vector<Var>{mul(g, reciprocal(a))};
    });
}

Var clamp_min(const Var& a, double lo) {
    Matrix mask = a.value().unaryExpr([lo](double x) { return x >= lo ? 1.0 : 0.0; });
    Matrix out = a.value().cwiseMax(lo);
    return Var::make(std::move(out), "clamp_min", {a}, [mask = std::move(mask)](const Var& g, const Var&) {
        return std::vector<Var>{mul_const(g, mask)};
    });
}

Var concat_cols(const Var& a, const Var& b) {
    if (a.rows() != b.rows()) throw ShapeError("concat_cols: row mismatch");
    Matrix out(a.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a.value();
    out.rightCols(b.cols()) = b.value();
    const Eigen::Index split = a.cols();
    const Eigen::Index right = b.cols();
    return Var::make(std::move(out), "concat_cols", {a, b}, [a, b, split, right](const Var& g, const Var&) {
        return std::vector<Var>{a.requires_grad() ? slice_cols(g, 0, split) : Var{},
                                b.requires_grad() ? slice_cols(g, split, right) : Var{}};
    });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols: out of range");
    Matrix out = a.value().middleCols(start, count);
    const Eigen::Index total = a.cols();
    return Var::make(std::move(out), "slice_cols", {a}, [start, total](const Var& g, const Var&) {
        return std::vector<Var>{pad_cols(g, start, total)};
    });
}

Var pad_cols(const Var& a, Eigen::Index start, Eigen::Index total) {
    if (start < 0 || start + a.cols() > total) throw ShapeError("pad_cols: out of range");
    Matrix out = Matrix::Zero(a.rows(), total);
    out.middleCols(start, a.cols()) = a.value();
    const Eigen::Index count = a.cols();
    return Var::make(std::move(out), "pad_cols", {a}, [start, count](const Var& g, const Var&) {
        return std::vector<Var>{slice_cols(g, start, count)};
    });
}

Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != a.rows() * a.cols()) throw ShapeError("reshape: element count mismatch");
    Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
    const Eigen::Index r0 = a.rows();
    const Eigen::Index c0 = a.cols();
    return Var::make(std::move(out), "reshape", {a}, [r0, c0](const Var& g, const Var&) {
        return std::vector<Var>{reshape(g, r0, c0)};
    });
}

Var im2col(const Var& a, Eigen::Index length, Eigen::Index kernel) {
    if (length < 1 || a.rows() % length != 0) throw ShapeError("im2col: rows not a multiple of length");
    if (kernel < 1) throw ShapeError("im2col: kernel must be >= 1");
    const Eigen::Index channels = a.cols();
    const Eigen::Index blocks = a.rows() / length;
    const Eigen::Index pad = (kernel - 1) / 2;
    Matrix out = Matrix::Zero(a.rows(), kernel * channels);
    const Matrix& x = a.value();
    for (Eigen::Index b = 0; b < blocks; ++b) {
        for (Eigen::Index t = 0; t < length; ++t) {
            for (Eigen::Index k = 0; k < kernel; ++k) {
                const Eigen::Index s = t + k - pad;
                if (s < 0 || s >= length) continue;
                out.block(b * length + t, k * channels, 1, channels) = x.row(b * length + s);
            }
        }
    }
    return Var::make(std::move(out), "im2col", {a}, [length, kernel](const Var& g, const Var&) {
        return std::vector<Var>{col2im(g, length, kernel)};
    });
}

Var col2im(const Var& a, Eigen::Index length, Eigen::Index kernel) {
    if (a.cols() % kernel != 0 || a.rows() % length != 0) throw ShapeError("col2im: bad shape");
    const Eigen::Index channels = a.cols() / kernel;
    const Eigen::Index blocks = a.rows() / length;
    const Eigen::Index pad = (kernel - 1) / 2;
    Matrix out = Matrix::Zero(a.rows(), channels);
    const Matrix& g = a.value();
    for (Eigen::Index b = 0; b < blocks; ++b) {
        for (Eigen::Index t = 0; t < length; ++t) {
            for (Eigen::Index k = 0; k < kernel; ++k) {
                const Eigen::Index s = t + k - pad;
                if (s < 0 || s >= length) continue;
                out.row(b * length + s) += g.block(b * length + t, k * channels, 1, channels);
            }
        }
    }
    return Var::make(std::move(out), "col2im", {a}, [length, kernel](const Var& g2, const Var&) {
        return std::vector<Var>{im2col(g2, length, kernel)};
    });
}

} // namespace stockgan::nn
