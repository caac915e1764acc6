#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "wavattack/errors.hpp"

namespace wavattack::roots {

/// Bisection on a bracket [lo, hi] with f(lo), f(hi) of opposite sign (or
/// one of them zero). Stops once hi - lo <= tol, or when the midpoint can
/// no longer split the bracket in floating point (tol = 0 requests that).
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 0.0) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw DomainError("bisect: bracket does not straddle a sign change");
    }
    while (hi - lo > tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if (std::signbit(fmid) == std::signbit(flo)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

/// Every sign change of f on a uniform grid of `points` nodes spanning
/// [lo, hi], refined by bisection. Grid nodes where f is exactly zero are
/// reported as roots. Result is ascending; roots closer than `merge` are
/// collapsed. Roots of even multiplicity between nodes are invisible to this
/// scan; callers that need tangencies look for them separately.
template <class F>
std::vector<double> bracket_roots(F&& f, double lo, double hi, std::size_t points, double tol = 0.0,
                                  double merge = 0.0) {
    if (points < 2) throw DomainError("bracket_roots: need at least two grid points");
    if (!(lo < hi)) throw DomainError("bracket_roots: empty interval");
    const double step = (hi - lo) / static_cast<double>(points - 1);
    auto node = [&](std::size_t i) { return i + 1 == points ? hi : lo + step * static_cast<double>(i); };

    std::vector<double> found;
    auto push = [&](double r) {
        if (found.empty() || r - found.back() > merge) found.push_back(r);
    };

    double x_prev = node(0);
    double f_prev = f(x_prev);
    if (f_prev == 0.0) push(x_prev);
    for (std::size_t i = 1; i < points; ++i) {
        const double x = node(i);
        const double fx = f(x);
        if (fx == 0.0) {
            push(x);
        } else if (f_prev != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
            push(bisect(f, x_prev, x, tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    return found;
}

}  // namespace wavattack::roots
