#pragma once

#include <cmath>
#include <utility>

#include "ehypo/common.hpp"

namespace ehypo {

// Generic exponentiation of a distribution: given a base CDF F and alpha > 0,
// the exponentiated distribution has CDF F^alpha. The callables take a time
// and return a probability (or density).

template <typename Cdf>
double exponentiate_cdf(Cdf&& cdf, double alpha, double t) {
    require_positive(alpha, "exponent");
    return std::pow(std::forward<Cdf>(cdf)(t), alpha);
}

// alpha F^{alpha-1} f
template <typename Cdf, typename Pdf>
double exponentiate_pdf(Cdf&& cdf, Pdf&& pdf, double alpha, double t) {
    require_positive(alpha, "exponent");
    const double f = std::forward<Pdf>(pdf)(t);
    if (f == 0.0) return 0.0;
    return alpha * std::pow(std::forward<Cdf>(cdf)(t), alpha - 1.0) * f;
}

// 1 - F^alpha, computed as -expm1(alpha log F). When the caller can supply
// the base survival S = 1 - F, log F = log1p(-S) keeps precision near F = 1.
template <typename Cdf>
double exponentiate_survival(Cdf&& cdf, double alpha, double t) {
    require_positive(alpha, "exponent");
    const double base = std::forward<Cdf>(cdf)(t);
    if (base <= 0.0) return 1.0;
    return -std::expm1(alpha * std::log(base));
}

template <typename Cdf, typename Pdf>
double exponentiate_hazard(Cdf&& cdf, Pdf&& pdf, double alpha, double t,
                           EvalFlags* flags = nullptr) {
    const double surv = exponentiate_survival(cdf, alpha, t);
    const double dens = exponentiate_pdf(cdf, pdf, alpha, t);
    if (surv == 0.0) {
        set_flag(flags, &EvalFlags::tail_saturation);
        return inf;
    }
    return dens / surv;
}

} // namespace ehypo
