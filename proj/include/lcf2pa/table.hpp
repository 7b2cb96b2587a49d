#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcf2pa/error.hpp"

namespace lcf2pa {

/// A real function of one variable sampled on a strictly increasing grid.
///
/// Evaluation interpolates linearly between samples and holds the end values
/// outside the sampled range. A single-sample table is a constant.
class Table {
public:
    Table() = default;

    Table(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
    {
        if (x_.size() != y_.size())
            throw DataError("table: abscissa and ordinate lengths differ");
        if (x_.empty())
            throw DataError("table: no samples");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1]))
                throw DataError("table: abscissa must be strictly increasing");
    }

    static Table constant(double value) { return Table({0.0}, {value}); }

    static Table from_pairs(std::span<const std::pair<double, double>> pairs)
    {
        std::vector<double> x, y;
        x.reserve(pairs.size());
        y.reserve(pairs.size());
        for (auto [a, b] : pairs) {
            x.push_back(a);
            y.push_back(b);
        }
        return Table(std::move(x), std::move(y));
    }

    [[nodiscard]] double operator()(double at) const
    {
        if (x_.empty())
            throw DataError("table: evaluated before being set");
        if (x_.size() == 1 || at <= x_.front())
            return y_.front();
        if (at >= x_.back())
            return y_.back();
        auto hi = std::upper_bound(x_.begin(), x_.end(), at);
        const auto i = static_cast<std::size_t>(hi - x_.begin());
        const double t = (at - x_[i - 1]) / (x_[i] - x_[i - 1]);
        return y_[i - 1] + t * (y_[i] - y_[i - 1]);
    }

    [[nodiscard]] bool empty() const { return x_.empty(); }
    [[nodiscard]] bool is_constant() const { return x_.size() == 1; }
    [[nodiscard]] std::size_t size() const { return x_.size(); }
    [[nodiscard]] const std::vector<double>& x() const { return x_; }
    [[nodiscard]] const std::vector<double>& y() const { return y_; }

    [[nodiscard]] double min_value() const { return *std::min_element(y_.begin(), y_.end()); }

    [[nodiscard]] Table scaled(double factor) const
    {
        Table out = *this;
        for (double& v : out.y_)
            v *= factor;
        return out;
    }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

} // namespace lcf2pa
