#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ehypo/common.hpp"
#include "ehypo/exponential.hpp"

namespace ehypo {

// Ordered list of strictly positive, pairwise-distinct stage rates.
// Distinctness is relative: |a_i - a_j| / max(a_i, a_j) >= 1e-9. Rates closer
// than that make the partial-fraction coefficients useless, so construction
// rejects them instead of regularizing.
class RateVector {
public:
    static constexpr double min_relative_gap = 1e-9;

    explicit RateVector(std::vector<double> rates) : rates_(std::move(rates)) {
        if (rates_.empty()) {
            throw DomainError("RateVector needs at least one rate");
        }
        for (double r : rates_) {
            require_positive(r, "stage rate");
        }
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            for (std::size_t j = i + 1; j < rates_.size(); ++j) {
                const double gap = std::abs(rates_[i] - rates_[j]);
                const double scale = std::max(rates_[i], rates_[j]);
                if (gap < min_relative_gap * scale) {
                    throw SingularityError(
                        "stage rates " + std::to_string(rates_[i]) + " and " +
                        std::to_string(rates_[j]) +
                        " are closer than the 1e-9 relative distinctness bound");
                }
            }
        }
    }

    std::size_t size() const { return rates_.size(); }
    double operator[](std::size_t i) const { return rates_[i]; }
    const std::vector<double>& values() const { return rates_; }
    double min_rate() const {
        double m = rates_[0];
        for (double r : rates_) m = std::min(m, r);
        return m;
    }

private:
    std::vector<double> rates_;
};

// Signed partial-fraction weights attached to a RateVector; they sum to one.
struct HypoCoefficients {
    std::vector<double> a;
};

// A_i = prod_{j != i} a_j / (a_j - a_i).
inline HypoCoefficients hypo_coefficients(const RateVector& r) {
    const std::size_t n = r.size();
    HypoCoefficients c;
    c.a.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double denom = r[j] - r[i];
            c.a[i] *= r[j] / denom;
        }
        if (!std::isfinite(c.a[i])) {
            throw SingularityError("hypoexponential coefficient " + std::to_string(i) +
                                   " overflowed; rates are too close");
        }
    }
    return c;
}

namespace detail {

// Raw signed mixture sum before clamping.
inline double hypo_cdf_raw(const RateVector& r, const HypoCoefficients& c, double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        sum += c.a[i] * -std::expm1(-r[i] * t);
    }
    return sum;
}

inline double hypo_pdf_raw(const RateVector& r, const HypoCoefficients& c, double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        sum += c.a[i] * r[i] * std::exp(-r[i] * t);
    }
    return sum;
}

// Survival as sum A_i e^{-a_i t}: the dominant tail term carries a positive
// coefficient, so this form stays accurate where 1 - CDF would cancel.
inline double hypo_survival_raw(const RateVector& r, const HypoCoefficients& c,
                                double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        sum += c.a[i] * std::exp(-r[i] * t);
    }
    return sum;
}

inline double clamp_cdf(double raw, EvalFlags* flags) {
    if (raw < -1e-8 || raw > 1.0 + 1e-8) {
        set_flag(flags, &EvalFlags::conditioning);
    }
    return clamp01(raw);
}

inline double hypo_log_cdf_raw(const RateVector& r, const HypoCoefficients& c,
                               double t, EvalFlags* flags) {
    if (t <= 0.0) return -inf;
    const double cdf = clamp_cdf(hypo_cdf_raw(r, c, t), flags);
    if (cdf < 0.5) {
        return std::log(cdf);
    }
    return std::log1p(-clamp_cdf(hypo_survival_raw(r, c, t), flags));
}

} // namespace detail

inline double hypo_cdf(const RateVector& r, double t, EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    if (t <= 0.0) return 0.0;
    const HypoCoefficients c = hypo_coefficients(r);
    return detail::clamp_cdf(detail::hypo_cdf_raw(r, c, t), flags);
}

inline double hypo_pdf(const RateVector& r, double t) {
    require_finite(t, "time");
    if (t < 0.0) return 0.0;
    if (t == 0.0) {
        // f(0) is exactly the single rate for n = 1 and zero for n >= 2;
        // the mixture sum would only reproduce that up to cancellation noise
        return r.size() == 1 ? r[0] : 0.0;
    }
    const HypoCoefficients c = hypo_coefficients(r);
    return detail::hypo_pdf_raw(r, c, t);
}

inline double hypo_survival(const RateVector& r, double t, EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    if (t <= 0.0) return 1.0;
    const HypoCoefficients c = hypo_coefficients(r);
    return detail::clamp_cdf(detail::hypo_survival_raw(r, c, t), flags);
}

// log F(t), switching to log1p(-survival) once F passes 1/2 so that neither
// side loses precision.
inline double hypo_log_cdf(const RateVector& r, double t, EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    return detail::hypo_log_cdf_raw(r, hypo_coefficients(r), t, flags);
}

} // namespace ehypo
