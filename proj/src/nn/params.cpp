#include "stockgan/nn/params.hpp"

#include "stockgan/errors.hpp"

#include <cmath>

namespace stockgan::nn {

void ModelParams::add(const std::string& name, Matrix value) {
    if (index_.count(name) != 0) {
        throw ParameterError("duplicate parameter name '" + name + "'");
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, std::move(value));
}

bool ModelParams::contains(const std::string& name) const { return index_.count(name) != 0; }

const Matrix& ModelParams::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ParameterError("unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

Matrix& ModelParams::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ParameterError("unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

std::size_t ModelParams::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : entries_) n += static_cast<std::size_t>(m.size());
    return n;
}

ModelParams ModelParams::zeros_like() const {
    ModelParams out;
    for (const auto& [name, m] : entries_) out.add(name, Matrix::Zero(m.rows(), m.cols()));
    return out;
}

bool ModelParams::operator==(const ModelParams& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& [na, a] = entries_[i];
        const auto& [nb, b] = other.entries_[i];
        if (na != nb || a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
    }
    return true;
}

ParamVars::ParamVars(const ModelParams& params, bool requires_grad) {
    for (const auto& [name, m] : params.entries()) {
        index_.emplace(name, vars_.size());
        names_.push_back(name);
        vars_.emplace_back(m, requires_grad);
    }
}

const Var& ParamVars::operator[](const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ParameterError("unknown parameter '" + name + "'");
    return vars_[it->second];
}

Matrix init_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

void check_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) {
        throw NumericError("non-finite value in " + what);
    }
}

} // namespace stockgan::nn
