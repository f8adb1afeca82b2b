#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ehypo {

// Error taxonomy. DomainError covers invalid parameters and arguments;
// the others mark numeric trouble at evaluation or fitting time.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Rates too close together: partial-fraction coefficients blow up.
struct SingularityError : DomainError {
    using DomainError::DomainError;
};

// A combinatorial or expansion cap was exceeded.
struct SizeError : DomainError {
    using DomainError::DomainError;
};

// Cancellation destroyed the value being computed.
struct ConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative numeric routine failed to converge.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No starting point produced a usable likelihood.
struct FitError : NumericError {
    using NumericError::NumericError;
};

// Out-of-band evaluation diagnostics for the "flag, don't throw" cases.
// Pass a pointer to collect them; nullptr ignores them.
struct EvalFlags {
    bool conditioning = false;      // cancellation pushed a CDF sum outside [-1e-8, 1+1e-8]
    bool tail_saturation = false;   // survival underflowed to zero inside a hazard
    bool unbounded_at_zero = false; // density diverges at t == 0
    bool tail_degeneracy = false;   // an order statistic hit CDF 0 or 1 before clamping
};

inline void set_flag(EvalFlags* flags, bool EvalFlags::*member) {
    if (flags) flags->*member = true;
}

constexpr double inf = std::numeric_limits<double>::infinity();

// log(1 - e^{-x}) for x > 0 without cancellation on either side of ln 2.
inline double log1mexp(double x) {
    return x > 0.6931471805599453 ? std::log1p(-std::exp(-x))
                                  : std::log(-std::expm1(-x));
}

inline double clamp01(double p) {
    if (p < 0.0) return 0.0;
    if (p > 1.0) return 1.0;
    return p;
}

inline bool nearly_integer(double x) {
    return std::abs(x - std::round(x)) <= 1e-12 * std::max(1.0, std::abs(x));
}

// C(n, k) by the multiplicative recurrence. Every intermediate value is
// itself a binomial coefficient, so the result is exact until it passes
// 2^53 and near-exact beyond.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return c;
}

// Signed integer power; exponent >= 0.
inline double ipow(double base, int exponent) {
    double r = 1.0;
    for (int i = 0; i < exponent; ++i) r *= base;
    return r;
}

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(what) + " must be finite");
    }
}

inline void require_positive(double x, const char* what) {
    require_finite(x, what);
    if (x <= 0.0) {
        throw DomainError(std::string(what) + " must be > 0");
    }
}

} // namespace ehypo
