#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ehypo/common.hpp"
#include "ehypo/hypoexp.hpp"

namespace ehypo {

// Maximum of independent Exponentiated Exponential variables, one per stage:
// CDF is the product prod_j (1 - e^{-lambda_j t})^{alpha_j}.
//
// Exponents may be positive reals, or nonnegative integers with at least one
// positive (a zero exponent contributes a constant factor 1 and drops out).
class MEEParams {
public:
    MEEParams(std::vector<double> lambdas, std::vector<double> exponents)
        : rates_(std::move(lambdas)), exponents_(std::move(exponents)) {
        if (exponents_.size() != rates_.size()) {
            throw DomainError("MEE needs one exponent per rate");
        }
        integer_exponents_ = true;
        bool any_positive = false;
        for (double e : exponents_) {
            require_finite(e, "MEE exponent");
            if (e < 0.0) throw DomainError("MEE exponent must be >= 0");
            if (e > 0.0) any_positive = true;
            if (!nearly_integer(e)) integer_exponents_ = false;
        }
        if (!any_positive) {
            throw DomainError("MEE needs at least one positive exponent");
        }
        if (!integer_exponents_) {
            for (double e : exponents_) {
                if (e <= 0.0) {
                    throw DomainError("real MEE exponents must all be > 0");
                }
            }
        }
    }

    MEEParams(const RateVector& lambdas, const std::vector<int>& exponents)
        : MEEParams(lambdas.values(),
                    std::vector<double>(exponents.begin(), exponents.end())) {}

    std::size_t size() const { return rates_.size(); }
    const std::vector<double>& lambdas() const { return rates_.values(); }
    const std::vector<double>& exponents() const { return exponents_; }
    bool integer_exponents() const { return integer_exponents_; }
    double exponent_sum() const {
        double s = 0.0;
        for (double e : exponents_) s += e;
        return s;
    }

private:
    RateVector rates_;
    std::vector<double> exponents_;
    bool integer_exponents_ = false;
};

inline double mee_log_cdf(const MEEParams& p, double t) {
    require_finite(t, "time");
    if (t <= 0.0) return -inf;
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double e = p.exponents()[j];
        if (e == 0.0) continue;
        sum += e * log1mexp(p.lambdas()[j] * t);
    }
    return sum;
}

inline double mee_cdf(const MEEParams& p, double t) {
    const double lc = mee_log_cdf(p, t);
    return lc == -inf ? 0.0 : std::exp(lc);
}

// Product-of-CDFs times the logarithmic-derivative sum
// sum_j lambda_j alpha_j e^{-lambda_j t} / (1 - e^{-lambda_j t}),
// assembled in log space. Near t = 0 the density behaves like
// t^{sum(alpha)-1}, which fixes the boundary value.
inline double mee_pdf(const MEEParams& p, double t, EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    if (t < 0.0) return 0.0;
    if (t == 0.0) {
        const double s = p.exponent_sum();
        if (s < 1.0) {
            set_flag(flags, &EvalFlags::unbounded_at_zero);
            return inf;
        }
        if (s > 1.0) return 0.0;
        double prod = 1.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            prod *= std::pow(p.lambdas()[j], p.exponents()[j]);
        }
        return prod;
    }
    double rate_sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double e = p.exponents()[j];
        if (e == 0.0) continue;
        // e^{-lt} / (1 - e^{-lt}) == 1 / expm1(lt)
        rate_sum += p.lambdas()[j] * e / std::expm1(p.lambdas()[j] * t);
    }
    if (rate_sum == 0.0) return 0.0;
    return std::exp(mee_log_cdf(p, t) + std::log(rate_sum));
}

// Binomial-expansion CDF
// prod_j sum_{i=0}^{g_j} C(g_j, i) (-1)^{g_j - i} e^{-lambda_j (g_j - i) t}.
// Alternating terms cancel badly as g_j grows, hence the hard cap; the
// product form above is the one to evaluate, this exists as a cross-check.
inline double mee_cdf_expanded(const MEEParams& p, double t) {
    require_finite(t, "time");
    if (!p.integer_exponents()) {
        throw DomainError("expanded MEE CDF needs integer exponents");
    }
    if (t <= 0.0) return 0.0;
    double prod = 1.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const int g = static_cast<int>(std::llround(p.exponents()[j]));
        if (g == 0) continue;
        if (g > 60) {
            throw SizeError("expansion exponent " + std::to_string(g) +
                            " exceeds the cap of 60");
        }
        double inner = 0.0;
        for (int i = 0; i <= g; ++i) {
            const double sign = ((g - i) % 2 == 0) ? 1.0 : -1.0;
            inner += binomial(g, i) * sign * std::exp(-p.lambdas()[j] * (g - i) * t);
        }
        prod *= inner;
    }
    return prod;
}

inline double mee_survival(const MEEParams& p, double t) {
    const double lc = mee_log_cdf(p, t);
    if (lc == -inf) return 1.0;
    return -std::expm1(lc);
}

inline double mee_hazard(const MEEParams& p, double t, EvalFlags* flags = nullptr) {
    const double surv = mee_survival(p, t);
    const double dens = mee_pdf(p, t, flags);
    if (surv == 0.0) {
        set_flag(flags, &EvalFlags::tail_saturation);
        return inf;
    }
    return dens / surv;
}

} // namespace ehypo
