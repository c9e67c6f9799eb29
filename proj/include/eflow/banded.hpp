#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace eflow {

/// Symmetric matrix in lower band storage: entry (i, j) with 0 <= i - j <= bandwidth.
class SymBandMatrix {
public:
    SymBandMatrix() = default;
    SymBandMatrix(std::size_t n, std::size_t bandwidth)
        : n_(n), kd_(bandwidth), data_(n * (bandwidth + 1), 0.0)
    {
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t bandwidth() const noexcept { return kd_; }

    bool in_band(std::size_t i, std::size_t j) const noexcept
    {
        return (i > j ? i - j : j - i) <= kd_;
    }

    double operator()(std::size_t i, std::size_t j) const
    {
        if (i < j)
            std::swap(i, j);
        if (i - j > kd_)
            return 0.0;
        return data_[j * (kd_ + 1) + (i - j)];
    }

    /// Adds v to the (i, j) entry; the symmetric partner is the same storage cell.
    void add(std::size_t i, std::size_t j, double v)
    {
        if (i < j)
            std::swap(i, j);
        if (i >= n_ || i - j > kd_)
            throw std::out_of_range("SymBandMatrix::add: entry outside band");
        data_[j * (kd_ + 1) + (i - j)] += v;
    }

    std::vector<double> multiply(std::span<const double> x) const
    {
        if (x.size() != n_)
            throw std::invalid_argument("SymBandMatrix::multiply: size mismatch");
        std::vector<double> y(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            const double* col = &data_[j * (kd_ + 1)];
            y[j] += col[0] * x[j];
            const std::size_t last = std::min(n_ - 1, j + kd_);
            for (std::size_t i = j + 1; i <= last; ++i) {
                const double a = col[i - j];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        return y;
    }

    double quad_form(std::span<const double> x) const
    {
        const auto y = multiply(x);
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            s += x[i] * y[i];
        return s;
    }

    /// this + alpha * other; both must share size and bandwidth.
    SymBandMatrix plus_scaled(const SymBandMatrix& other, double alpha) const
    {
        if (other.n_ != n_ || other.kd_ != kd_)
            throw std::invalid_argument("SymBandMatrix::plus_scaled: shape mismatch");
        SymBandMatrix out = *this;
        for (std::size_t k = 0; k < data_.size(); ++k)
            out.data_[k] += alpha * other.data_[k];
        return out;
    }

    double max_abs() const noexcept
    {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t n_ = 0;
    std::size_t kd_ = 0;
    std::vector<double> data_;
};

} // namespace eflow
