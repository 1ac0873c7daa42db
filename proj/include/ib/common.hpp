#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ib {

// Base class for all library errors. Subclasses name the condition, the
// message carries the offending values.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidDistribution : Error { using Error::Error; };
struct InfiniteDivergence : Error { using Error::Error; };
struct SizeExceeded : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct EpsTooSmall : Error { using Error::Error; };
struct EmptyCurve : Error { using Error::Error; };
struct BudgetInfeasible : Error { using Error::Error; };

// Mass-conservation tolerance for distribution constructors.
inline constexpr double kMassTol = 1e-12;

// Dense-table guard: no operation materializes more than this many cells.
inline constexpr std::size_t kMaxTableCells = 10'000'000;

inline constexpr double kNatsPerBit = 0.6931471805599453;  // ln 2

// x ln x with the continuity convention 0 ln 0 = 0.
inline double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;
}

// Neumaier-compensated sum; keeps mass checks on multi-million-cell tables
// well inside kMassTol.
template <typename It>
double stable_sum(It first, It last) {
    double sum = 0.0, comp = 0.0;
    for (; first != last; ++first) {
        double v = *first;
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

// Clamp the tiny negatives that H(A)+H(B)-H(A,B) style cancellation produces.
inline double clamp_nonneg(double v) {
    return v < 0.0 && v > -1e-9 ? 0.0 : v;
}

inline double nats_to_bits(double nats) { return nats / kNatsPerBit; }
inline double bits_to_nats(double bits) { return bits * kNatsPerBit; }

}  // namespace ib
