#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ehypo/common.hpp"
#include "ehypo/hypoexp.hpp"
#include "ehypo/mee.hpp"

namespace ehypo {

// Exponentiated Hypoexponential distribution: the hypoexponential CDF raised
// to the power k. The power form [F_Sn(t)]^k is canonical and valid for any
// real k > 0; a multinomial expansion over the composition set exists for
// integer k and serves as a structural cross-check.
class EHypoParams {
public:
    EHypoParams(RateVector rates, double exponent)
        : rates_(std::move(rates)), exponent_(exponent) {
        require_positive(exponent_, "EHypo exponent");
    }

    EHypoParams(std::vector<double> rates, double exponent)
        : EHypoParams(RateVector(std::move(rates)), exponent) {}

    const RateVector& rates() const { return rates_; }
    double exponent() const { return exponent_; }
    std::size_t stages() const { return rates_.size(); }
    bool integer_exponent() const { return nearly_integer(exponent_); }
    int exponent_as_int() const {
        if (!integer_exponent()) {
            throw DomainError("exponent " + std::to_string(exponent_) +
                              " is not an integer");
        }
        return static_cast<int>(std::llround(exponent_));
    }

private:
    RateVector rates_;
    double exponent_;
};

// A composition of k into n nonnegative parts.
using MultiIndex = std::vector<int>;

constexpr double composition_cap = 1e6;

inline double composition_count(int n, int k) {
    return binomial(k + n - 1, n - 1);
}

// All compositions of k into n parts, in lexicographically decreasing order.
inline std::vector<MultiIndex> enumerate_compositions(int n, int k) {
    if (n < 1 || k < 1) {
        throw DomainError("composition enumeration needs n >= 1 and k >= 1");
    }
    const double count = composition_count(n, k);
    if (count > composition_cap) {
        throw SizeError("enumerating " + std::to_string(count) +
                        " compositions exceeds the cap of 1,000,000");
    }
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(count));
    MultiIndex cur(static_cast<std::size_t>(n), 0);
    const auto fill = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n - 1) {
            cur[static_cast<std::size_t>(pos)] = remaining;
            out.push_back(cur);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            cur[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    fill(fill, 0, k);
    return out;
}

inline double multinomial(int k, const MultiIndex& g) {
    double coeff = 1.0;
    int prefix = 0;
    for (int gi : g) {
        prefix += gi;
        coeff *= binomial(prefix, gi);
    }
    if (prefix != k) {
        throw DomainError("multi-index parts must sum to the exponent");
    }
    return coeff;
}

// One term of the multinomial expansion: the multi-index, its signed weight
// B = multinomial(k; g) * prod_j A_j^{g_j}, and the MEE component it scales.
struct ExpansionTerm {
    MultiIndex index;
    double coefficient;
    MEEParams component;
};

struct EHypoExpansion {
    std::vector<ExpansionTerm> terms;

    double coefficient_sum() const {
        double s = 0.0;
        for (const auto& t : terms) s += t.coefficient;
        return s;
    }
};

inline EHypoExpansion ehypo_expansion(const EHypoParams& p) {
    const int k = p.exponent_as_int();
    const int n = static_cast<int>(p.stages());
    const HypoCoefficients coeffs = hypo_coefficients(p.rates());
    EHypoExpansion expansion;
    for (MultiIndex& g : enumerate_compositions(n, k)) {
        double b = multinomial(k, g);
        for (int j = 0; j < n; ++j) {
            b *= ipow(coeffs.a[static_cast<std::size_t>(j)],
                      g[static_cast<std::size_t>(j)]);
        }
        MEEParams component(p.rates(), g);
        expansion.terms.push_back({std::move(g), b, std::move(component)});
    }
    return expansion;
}

inline double ehypo_log_cdf(const EHypoParams& p, double t,
                            EvalFlags* flags = nullptr) {
    return p.exponent() * hypo_log_cdf(p.rates(), t, flags);
}

inline double ehypo_cdf(const EHypoParams& p, double t, EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    if (t <= 0.0) return 0.0;
    if (p.exponent() == 1.0) return hypo_cdf(p.rates(), t, flags);
    return std::exp(ehypo_log_cdf(p, t, flags));
}

// k F^{k-1} f in log space. Near zero the density scales like t^{nk-1}; the
// t == 0 boundary follows that power.
inline double ehypo_pdf(const EHypoParams& p, double t, EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    if (t < 0.0) return 0.0;
    const double nk = static_cast<double>(p.stages()) * p.exponent();
    if (t == 0.0) {
        if (nk < 1.0) {
            set_flag(flags, &EvalFlags::unbounded_at_zero);
            return inf;
        }
        if (nk > 1.0) return 0.0;
        // nk == 1: limit of nk (prod a_i / n!)^k t^{nk-1}
        double prod = 1.0;
        for (double r : p.rates().values()) prod *= r;
        double fact = 1.0;
        for (std::size_t i = 2; i <= p.stages(); ++i) fact *= static_cast<double>(i);
        return std::pow(prod / fact, p.exponent());
    }
    if (p.exponent() == 1.0) return hypo_pdf(p.rates(), t);
    const HypoCoefficients c = hypo_coefficients(p.rates());
    const double dens = detail::hypo_pdf_raw(p.rates(), c, t);
    if (dens <= 0.0) {
        // cancellation noise; the true density is positive but below precision
        set_flag(flags, &EvalFlags::conditioning);
        return 0.0;
    }
    const double log_base = hypo_log_cdf(p.rates(), t, flags);
    return std::exp(std::log(p.exponent()) + (p.exponent() - 1.0) * log_base +
                    std::log(dens));
}

// 1 - F^k as -expm1(k log F); the log comes from the survival side once the
// base CDF passes 1/2, which keeps the deep tail accurate.
inline double ehypo_survival(const EHypoParams& p, double t,
                             EvalFlags* flags = nullptr) {
    require_finite(t, "time");
    if (t <= 0.0) return 1.0;
    if (p.exponent() == 1.0) return hypo_survival(p.rates(), t, flags);
    const double log_cdf = ehypo_log_cdf(p, t, flags);
    if (log_cdf == -inf) return 1.0;
    return -std::expm1(log_cdf);
}

inline double ehypo_hazard(const EHypoParams& p, double t, EvalFlags* flags = nullptr) {
    const double surv = ehypo_survival(p, t, flags);
    const double dens = ehypo_pdf(p, t, flags);
    if (surv == 0.0) {
        set_flag(flags, &EvalFlags::tail_saturation);
        return inf;
    }
    return dens / surv;
}

// Expansion-form evaluations (integer k): sums of B_i-weighted MEE values.
inline double expansion_cdf(const EHypoExpansion& e, double t) {
    double sum = 0.0;
    for (const auto& term : e.terms) {
        sum += term.coefficient * mee_cdf(term.component, t);
    }
    return sum;
}

inline double expansion_pdf(const EHypoExpansion& e, double t) {
    double sum = 0.0;
    for (const auto& term : e.terms) {
        sum += term.coefficient * mee_pdf(term.component, t);
    }
    return sum;
}

inline double expansion_survival(const EHypoExpansion& e, double t) {
    double sum = 0.0;
    for (const auto& term : e.terms) {
        sum += term.coefficient * mee_survival(term.component, t);
    }
    return sum;
}

inline double ehypo_cdf_expanded(const EHypoParams& p, double t) {
    return expansion_cdf(ehypo_expansion(p), t);
}

inline double ehypo_pdf_expanded(const EHypoParams& p, double t) {
    return expansion_pdf(ehypo_expansion(p), t);
}

inline double ehypo_survival_expanded(const EHypoParams& p, double t) {
    return expansion_survival(ehypo_expansion(p), t);
}

// Quantile by safeguarded secant inside a doubling bracket. The CDF is
// strictly increasing on (0, inf), so the bracket always closes.
inline double ehypo_quantile(const EHypoParams& p, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("quantile level must lie in (0, 1)");
    }
    double hi = 1.0 / p.rates().min_rate();
    int doublings = 0;
    while (ehypo_cdf(p, hi) <= u) {
        hi *= 2.0;
        if (++doublings > 2000) {
            throw NumericError("quantile bracket failed to close");
        }
    }
    double lo = 0.0;
    double f_lo = -u;
    double f_hi = ehypo_cdf(p, hi) - u;
    constexpr double tol = 1e-12;
    for (int it = 0; it < 200; ++it) {
        if (hi - lo <= tol) {
            return 0.5 * (lo + hi);
        }
        double mid;
        if (f_hi != f_lo) {
            mid = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            const double margin = 0.01 * (hi - lo);
            if (!(mid > lo + margin && mid < hi - margin)) {
                mid = 0.5 * (lo + hi);
            }
        } else {
            mid = 0.5 * (lo + hi);
        }
        const double f_mid = ehypo_cdf(p, mid) - u;
        if (f_mid == 0.0) return mid;
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    throw NumericError("quantile root finding did not converge in 200 iterations");
}

// Sampler owning its generator state. Integer exponents draw the max of k
// hypoexponential sums, which has CDF [F_Sn]^k exactly; real exponents fall
// back to inverse transform through the quantile.
//
// One instance is not safe for concurrent use; independent instances with
// distinct seeds are.
class EHypoSampler {
public:
    EHypoSampler(EHypoParams params, std::uint64_t seed)
        : params_(std::move(params)), gen_(seed) {
        integer_k_ = params_.integer_exponent();
        if (integer_k_) k_int_ = params_.exponent_as_int();
    }

    double operator()() {
        if (!integer_k_) {
            return ehypo_quantile(params_, uniform());
        }
        double best = 0.0;
        for (int rep = 0; rep < k_int_; ++rep) {
            double sum = 0.0;
            for (double rate : params_.rates().values()) {
                sum += -std::log1p(-uniform()) / rate;
            }
            best = std::max(best, sum);
        }
        return best;
    }

    std::vector<double> take(std::size_t count) {
        std::vector<double> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.push_back((*this)());
        return out;
    }

private:
    // 52-bit uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(gen_() >> 12) + 0.5) * 0x1.0p-52;
    }

    EHypoParams params_;
    std::mt19937_64 gen_;
    bool integer_k_ = false;
    int k_int_ = 0;
};

inline std::vector<double> ehypo_sample(const EHypoParams& p, std::size_t count,
                                        std::uint64_t seed) {
    if (count < 1) {
        throw DomainError("sample count must be >= 1");
    }
    return EHypoSampler(p, seed).take(count);
}

} // namespace ehypo
