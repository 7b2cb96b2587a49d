#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lcf2pa/csv.hpp"
#include "lcf2pa/error.hpp"

namespace lcf2pa::uncertainty {

struct Measured {
    std::string name;
    double value = 0.0;
    std::string unit;
    double rel_sigma = 0.0;
    /// Power with which the quantity enters the target formula
    double exponent = 1.0;
};

struct Contribution {
    std::string name;
    double contribution;
};

struct Budget {
    std::vector<Contribution> components;
    double combined_rel = 0.0;
    double coverage_k = 2.0;
    double expanded_rel = 0.0;
};

/// First-order combination: combined = sqrt(sum (exponent * rel_sigma)^2), expanded = k * combined.
inline Budget propagate(std::span<const Measured> inputs, double k = 2.0)
{
    if (!(k > 0.0))
        throw DomainError("propagate: coverage factor must be positive");
    Budget b;
    b.coverage_k = k;
    double ss = 0.0;
    for (const auto& m : inputs) {
        if (!(m.rel_sigma >= 0.0))
            throw DataError("propagate: '" + m.name + "' has a negative relative uncertainty");
        const double c = std::abs(m.exponent) * m.rel_sigma;
        b.components.push_back({m.name, c});
        ss += c * c;
    }
    b.combined_rel = std::sqrt(ss);
    b.expanded_rel = k * b.combined_rel;
    return b;
}

/// Contributions sorted largest first (ties by name), then combined and expanded totals.
inline std::string budget_report(const Budget& b, const std::string& target)
{
    auto sorted = b.components;
    std::sort(sorted.begin(), sorted.end(), [](const Contribution& x, const Contribution& y) {
        return x.contribution != y.contribution ? x.contribution > y.contribution : x.name < y.name;
    });
    std::size_t width = 8;
    for (const auto& c : sorted)
        width = std::max(width, c.name.size());
    std::ostringstream out;
    out << "uncertainty budget: " << target << '\n';
    out << std::fixed << std::setprecision(2);
    for (const auto& c : sorted)
        out << "  " << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << std::right << std::setw(7)
            << 100.0 * c.contribution << " %\n";
    out << "  " << std::left << std::setw(static_cast<int>(width)) << "combined" << "  " << std::right << std::setw(7)
        << 100.0 * b.combined_rel << " %\n";
    out << "  " << std::left << std::setw(static_cast<int>(width)) << "expanded" << "  " << std::right << std::setw(7)
        << 100.0 * b.expanded_rel << " %  (k = " << b.coverage_k << ")\n";
    return out.str();
}

/// Columns: name, rel_sigma, exponent.
inline std::vector<Measured> read_budget_csv(const std::string& path)
{
    const auto doc = csv::read(path);
    if (doc.header.size() < 3 || doc.header[0] != "name" || doc.header[1] != "rel_sigma" || doc.header[2] != "exponent")
        throw DataError(path + ": header must be 'name,rel_sigma,exponent'");
    std::vector<Measured> out;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const std::string where = path + ":" + std::to_string(r + 2);
        if (row.size() < 3)
            throw DataError(where + ": expected three columns");
        Measured m;
        m.name = row[0];
        m.rel_sigma = csv::to_number(row[1], where);
        m.exponent = csv::to_number(row[2], where);
        if (m.rel_sigma < 0.0)
            throw DataError(where + ": rel_sigma must be non-negative");
        out.push_back(m);
    }
    return out;
}

inline void write_budget_csv(std::span<const Measured> inputs, const std::string& path)
{
    csv::Writer w(path, {"name", "rel_sigma", "exponent"});
    for (const auto& m : inputs) {
        std::ostringstream a, b;
        a << std::setprecision(17) << m.rel_sigma;
        b << std::setprecision(17) << m.exponent;
        w.row_strings({m.name, a.str(), b.str()});
    }
    w.close();
}

} // namespace lcf2pa::uncertainty
