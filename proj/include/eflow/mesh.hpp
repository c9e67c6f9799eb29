#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eflow {

/// A dissection a = x_0 < x_1 < ... < x_M = b of the parameter interval.
///
/// Elements are indexed 0..M-1; element e spans [x_e, x_{e+1}].
/// Immutable after construction.
class Dissection {
public:
    explicit Dissection(std::vector<double> nodes) : nodes_(std::move(nodes))
    {
        if (nodes_.size() < 2)
            throw std::invalid_argument("Dissection: need at least one element");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (!(nodes_[i] > nodes_[i - 1]))
                throw std::invalid_argument("Dissection: nodes must be strictly increasing (index " +
                                            std::to_string(i) + ")");
        sizes_.resize(nodes_.size() - 1);
        for (std::size_t e = 0; e < sizes_.size(); ++e)
            sizes_[e] = nodes_[e + 1] - nodes_[e];
        h_max_ = *std::max_element(sizes_.begin(), sizes_.end());
        h_min_ = *std::min_element(sizes_.begin(), sizes_.end());
    }

    static Dissection uniform(double a, double b, std::size_t elements)
    {
        if (elements == 0)
            throw std::invalid_argument("uniform_dissection: element count must be positive");
        if (!(b > a))
            throw std::invalid_argument("uniform_dissection: require b > a");
        std::vector<double> x(elements + 1);
        const double len = b - a;
        for (std::size_t i = 0; i <= elements; ++i)
            x[i] = a + len * static_cast<double>(i) / static_cast<double>(elements);
        x.back() = b;
        return Dissection(std::move(x));
    }

    double a() const noexcept { return nodes_.front(); }
    double b() const noexcept { return nodes_.back(); }
    std::size_t elements() const noexcept { return sizes_.size(); }
    std::size_t node_count() const noexcept { return nodes_.size(); }

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    double node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<double>& element_sizes() const noexcept { return sizes_; }
    double h(std::size_t e) const { return sizes_.at(e); }
    double h_max() const noexcept { return h_max_; }

    /// Smallest c with h_max <= c * h_e for every element.
    double quasi_uniformity() const noexcept { return h_max_ / h_min_; }

    double midpoint(std::size_t e) const { return 0.5 * (nodes_.at(e) + nodes_.at(e + 1)); }

    /// Element containing x. Interior nodes belong to the element on their left;
    /// x = a belongs to element 0.
    std::size_t locate(double x) const
    {
        if (x < a() || x > b())
            throw std::out_of_range("Dissection::locate: x = " + std::to_string(x) +
                                    " outside [a, b]");
        auto it = std::lower_bound(nodes_.begin() + 1, nodes_.end(), x);
        return static_cast<std::size_t>(it - nodes_.begin()) - 1;
    }

    /// N_1: the element endpoints, M+1 points.
    std::vector<double> nodes_p1() const { return nodes_; }

    /// N_2: endpoints and midpoints in increasing order, 2M+1 points.
    std::vector<double> nodes_p2() const
    {
        std::vector<double> out;
        out.reserve(2 * elements() + 1);
        for (std::size_t e = 0; e < elements(); ++e) {
            out.push_back(nodes_[e]);
            out.push_back(midpoint(e));
        }
        out.push_back(b());
        return out;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> sizes_;
    double h_max_ = 0.0;
    double h_min_ = 0.0;
};

} // namespace eflow
