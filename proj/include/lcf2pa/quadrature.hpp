#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lcf2pa/error.hpp"

namespace lcf2pa {

struct QuadratureOptions {
    double rel_tol = 1e-8;
    int min_panels = 256;
    int max_depth = 40;
};

namespace detail {

template <class F>
double simpson_refine(F& f, double a, double fa, double m, double fm, double b, double fb, double whole,
                      double tol, int depth, bool& exhausted)
{
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (depth <= 0) {
        exhausted = true;
        return left + right + delta / 15.0;
    }
    return simpson_refine(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, exhausted) +
           simpson_refine(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, exhausted);
}

} // namespace detail

/// Adaptive Simpson integration of f over [a, b].
///
/// The interval is first split into `min_panels` equal panels; each panel is refined
/// until its Richardson error estimate falls below its share of rel_tol * sum|panel|.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opt = {})
{
    if (a == b)
        return 0.0;
    const int n = std::max(1, opt.min_panels);
    const double h = (b - a) / n;

    std::vector<double> xs(2 * static_cast<std::size_t>(n) + 1);
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = (i + 1 == xs.size()) ? b : a + 0.5 * h * static_cast<double>(i);
        fs[i] = f(xs[i]);
        if (!std::isfinite(fs[i]))
            throw NumericalError("integrate: integrand is not finite");
    }

    std::vector<double> coarse(static_cast<std::size_t>(n));
    double scale = 0.0;
    for (int p = 0; p < n; ++p) {
        const std::size_t i = 2 * static_cast<std::size_t>(p);
        coarse[p] = (xs[i + 2] - xs[i]) / 6.0 * (fs[i] + 4.0 * fs[i + 1] + fs[i + 2]);
        scale += std::abs(coarse[p]);
    }
    if (scale == 0.0)
        return 0.0;

    const double panel_tol = opt.rel_tol * scale / n;
    bool exhausted = false;
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
        const std::size_t i = 2 * static_cast<std::size_t>(p);
        total += detail::simpson_refine(f, xs[i], fs[i], xs[i + 1], fs[i + 1], xs[i + 2], fs[i + 2], coarse[p],
                                        panel_tol, opt.max_depth, exhausted);
    }
    if (exhausted)
        throw NumericalError("integrate: tolerance not reached at maximum refinement depth");
    return total;
}

/// Composite trapezoid rule over a sampled grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw DataError("trapezoid: grid and values differ in length");
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

} // namespace lcf2pa
