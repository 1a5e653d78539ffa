#pragma once

#include "stockgan/nn/autodiff.hpp"
#include "stockgan/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stockgan::nn {

// Named parameter tensors in insertion order. Every tensor is stored as a
// 2-D matrix (biases are 1 x n, conv kernels are (kernel*in) x out).
class ModelParams {
public:
    void add(const std::string& name, Matrix value);
    bool contains(const std::string& name) const;
    const Matrix& at(const std::string& name) const;
    Matrix& at(const std::string& name);

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<std::pair<std::string, Matrix>>& entries() const noexcept { return entries_; }
    std::vector<std::pair<std::string, Matrix>>& entries() noexcept { return entries_; }
    std::size_t scalar_count() const;

    // Same names and shapes, zero values.
    ModelParams zeros_like() const;

    bool operator==(const ModelParams& other) const;

private:
    std::vector<std::pair<std::string, Matrix>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

using LayerGrads = ModelParams;

// Graph leaves for one forward pass.
class ParamVars {
public:
    ParamVars() = default;
    ParamVars(const ModelParams& params, bool requires_grad);

    const Var& operator[](const std::string& name) const;
    const std::vector<Var>& vars() const noexcept { return vars_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
    std::vector<Var> vars_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Matrix init_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, std::mt19937_64& rng);

void check_finite(const Matrix& m, const std::string& what);

} // namespace stockgan::nn
