#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fskg/error.hpp"

namespace fskg::num {

using Vector = std::vector<double>;

// Row-major dense matrix of 64-bit reals.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    Vector row(std::size_t r) const {
        return Vector(data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                      data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    }

    void set_row(std::size_t r, const Vector& v) {
        if (v.size() != cols) throw ShapeError("Matrix::set_row: width mismatch");
        for (std::size_t c = 0; c < cols; ++c) at(r, c) = v[c];
    }
};

enum class ParamGroup {
    Embeddings,  // the modality tables M
    Meta,        // relation-meta learner prior
    Adapter,     // bottleneck adapter parameters
};

using ParamId = std::int32_t;

// Named, grouped learnable tensors. Vectors are stored as cols == 1.
class ParamStore {
public:
    ParamId add(std::string name, std::size_t rows, std::size_t cols, ParamGroup group) {
        names_.push_back(std::move(name));
        groups_.push_back(group);
        shapes_.emplace_back(rows, cols);
        values_.emplace_back(rows * cols, 0.0);
        return static_cast<ParamId>(values_.size() - 1);
    }

    std::size_t size() const { return values_.size(); }
    const std::string& name(ParamId id) const { return names_[static_cast<std::size_t>(id)]; }
    ParamGroup group(ParamId id) const { return groups_[static_cast<std::size_t>(id)]; }
    std::size_t rows(ParamId id) const { return shapes_[static_cast<std::size_t>(id)].first; }
    std::size_t cols(ParamId id) const { return shapes_[static_cast<std::size_t>(id)].second; }

    std::vector<double>& values(ParamId id) { return values_[static_cast<std::size_t>(id)]; }
    const std::vector<double>& values(ParamId id) const { return values_[static_cast<std::size_t>(id)]; }

    std::vector<ParamId> ids_in_group(ParamGroup g) const {
        std::vector<ParamId> out;
        for (std::size_t i = 0; i < groups_.size(); ++i) {
            if (groups_[i] == g) out.push_back(static_cast<ParamId>(i));
        }
        return out;
    }

    std::size_t scalar_count(ParamGroup g) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < groups_.size(); ++i) {
            if (groups_[i] == g) n += values_[i].size();
        }
        return n;
    }

private:
    std::vector<std::string> names_;
    std::vector<ParamGroup> groups_;
    std::vector<std::pair<std::size_t, std::size_t>> shapes_;
    std::vector<std::vector<double>> values_;
};

// Per-parameter gradient accumulators, shape-matched to a ParamStore.
class GradMap {
public:
    explicit GradMap(const ParamStore& store) {
        grads_.reserve(store.size());
        for (std::size_t i = 0; i < store.size(); ++i) {
            grads_.emplace_back(store.values(static_cast<ParamId>(i)).size(), 0.0);
        }
    }

    std::vector<double>& operator[](ParamId id) { return grads_[static_cast<std::size_t>(id)]; }
    const std::vector<double>& operator[](ParamId id) const {
        return grads_[static_cast<std::size_t>(id)];
    }

    void add(const GradMap& other) {
        for (std::size_t i = 0; i < grads_.size(); ++i) {
            for (std::size_t j = 0; j < grads_[i].size(); ++j) grads_[i][j] += other.grads_[i][j];
        }
    }

    void scale(double s) {
        for (auto& g : grads_)
            for (double& x : g) x *= s;
    }

    std::size_t size() const { return grads_.size(); }

private:
    std::vector<std::vector<double>> grads_;
};

} // namespace fskg::num
