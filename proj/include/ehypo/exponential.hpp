#pragma once

#include <cmath>

#include "ehypo/common.hpp"

namespace ehypo {

// Exponential distribution with rate > 0. CDF computed through expm1 so the
// small-t regime keeps full precision.
inline double exp_cdf(double rate, double t) {
    require_positive(rate, "exponential rate");
    require_finite(t, "time");
    if (t <= 0.0) return 0.0;
    return -std::expm1(-rate * t);
}

inline double exp_pdf(double rate, double t) {
    require_positive(rate, "exponential rate");
    require_finite(t, "time");
    if (t < 0.0) return 0.0;
    return rate * std::exp(-rate * t);
}

inline double exp_log_cdf(double rate, double t) {
    require_positive(rate, "exponential rate");
    require_finite(t, "time");
    if (t <= 0.0) return -inf;
    return log1mexp(rate * t);
}

// Exponentiated Exponential: CDF (1 - e^{-rate t})^exponent.
struct EEParams {
    double rate;
    double exponent;

    EEParams(double rate_, double exponent_) : rate(rate_), exponent(exponent_) {
        require_positive(rate, "EE rate");
        require_positive(exponent, "EE exponent");
    }
};

inline double ee_log_cdf(const EEParams& p, double t) {
    if (t <= 0.0) return -inf;
    return p.exponent * log1mexp(p.rate * t);
}

inline double ee_cdf(const EEParams& p, double t) {
    require_finite(t, "time");
    if (t <= 0.0) return 0.0;
    return std::exp(ee_log_cdf(p, t));
}

// Density exponent * rate * (1 - e^{-rate t})^{exponent-1} e^{-rate t}.
// At t == 0 the boundary value depends on the exponent: unbounded below 1,
// rate at exactly 1, zero above 1.
inline double ee_pdf(const EEParams& p, double t, EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    if (t < 0.0) return 0.0;
    if (t == 0.0) {
        if (p.exponent < 1.0) {
            set_flag(flags, &EvalFlags::unbounded_at_zero);
            return inf;
        }
        return p.exponent == 1.0 ? p.rate : 0.0;
    }
    const double log_base = log1mexp(p.rate * t);
    return std::exp(std::log(p.exponent * p.rate) + (p.exponent - 1.0) * log_base -
                    p.rate * t);
}

} // namespace ehypo
