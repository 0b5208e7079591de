#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vra/errors.hpp"

namespace vra {

/// Dense row-major matrix with value semantics.
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : m_rows(rows), m_cols(cols), m_data(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<T> values)
        : m_rows(rows), m_cols(cols), m_data(std::move(values)) {
        if (m_data.size() != rows * cols) {
            throw DimensionMismatch("matrix storage holds " + std::to_string(m_data.size()) +
                                    " values, expected " + std::to_string(rows * cols));
        }
    }

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }
    std::size_t size() const noexcept { return m_data.size(); }
    bool empty() const noexcept { return m_data.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return m_data[r * m_cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return m_data[r * m_cols + c]; }

    std::span<T> row(std::size_t r) { return {m_data.data() + r * m_cols, m_cols}; }
    std::span<const T> row(std::size_t r) const { return {m_data.data() + r * m_cols, m_cols}; }

    std::span<T> values() noexcept { return m_data; }
    std::span<const T> values() const noexcept { return m_data; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<T> m_data;
};

} // namespace vra
