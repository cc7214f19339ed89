#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "risp/error.hpp"

namespace risp {

// Order-independent accumulator for bounded terms.  Every term is rounded
// once onto a fixed 2^-60 grid and added into a 128-bit integer, so the sum
// depends only on the multiset of terms, never on their order.  This is what
// makes the pixel losses exactly invariant under spatial permutations of
// their inputs and keeps reductions bit-stable across runs.
//
// Terms must satisfy |term| < 2^50; per-term rounding error is below 2^-61.
class StableSum {
public:
    void add(double v) {
        if (!(std::fabs(v) < 0x1p50)) {
            throw DomainError("accumulator term out of range or not finite");
        }
        const double s = std::ldexp(v, 60);                       // exact
        const double hi = std::trunc(std::ldexp(s, -62));         // |hi| <= 2^48
        const double lo = std::nearbyint(s - std::ldexp(hi, 62)); // |lo| <= 2^62
        sum_ += (static_cast<__int128>(static_cast<long long>(hi)) << 62) +
                static_cast<__int128>(static_cast<long long>(lo));
        ++count_;
    }

    double value() const { return std::ldexp(static_cast<double>(sum_), -60); }

    std::size_t count() const { return count_; }

    double mean() const {
        if (count_ == 0) throw DimensionError("mean of zero terms");
        return value() / static_cast<double>(count_);
    }

private:
    __int128 sum_ = 0;
    std::size_t count_ = 0;
};

inline double stable_mean(std::span<const double> terms) {
    StableSum s;
    for (double t : terms) s.add(t);
    return s.mean();
}

}  // namespace risp
