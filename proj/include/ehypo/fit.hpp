#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ehypo/common.hpp"
#include "ehypo/exphypo.hpp"
#include "ehypo/hypoexp.hpp"
#include "ehypo/optimize.hpp"

namespace ehypo {

// An i.i.d. sample of strictly positive observation times.
class Sample {
public:
    explicit Sample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) {
            throw DomainError("sample is empty");
        }
        for (double v : values_) {
            require_positive(v, "observation");
        }
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

    std::vector<double> sorted() const {
        std::vector<double> out = values_;
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::vector<double> values_;
};

// N log k + sum_j log f_Sn(x_j) + (k-1) sum_j log F_Sn(x_j).
// Returns -inf (with a conditioning flag) when cancellation drives a density
// value to or below zero.
inline double loglik(const EHypoParams& p, const Sample& s, EvalFlags* flags = nullptr) {
    const RateVector& r = p.rates();
    const double k = p.exponent();
    const HypoCoefficients c = hypo_coefficients(r);
    double sum_log_pdf = 0.0;
    double sum_log_cdf = 0.0;
    for (double x : s.values()) {
        const double dens = detail::hypo_pdf_raw(r, c, x);
        if (dens <= 0.0 || !std::isfinite(dens)) {
            set_flag(flags, &EvalFlags::conditioning);
            return -inf;
        }
        sum_log_pdf += std::log(dens);
        sum_log_cdf += detail::hypo_log_cdf_raw(r, c, x, flags);
    }
    return static_cast<double>(s.size()) * std::log(k) + sum_log_pdf +
           (k - 1.0) * sum_log_cdf;
}

// Closed-form conditional maximizer of k given the rates:
// k = -N / sum_j log F_Sn(x_j). Positive because every log F is negative.
inline double k_hat(const RateVector& rates, const Sample& s) {
    const HypoCoefficients c = hypo_coefficients(rates);
    double sum_log_cdf = 0.0;
    for (double x : s.values()) {
        const double cdf = clamp01(detail::hypo_cdf_raw(rates, c, x));
        if (cdf <= 0.0) {
            throw ConditioningError(
                "base CDF evaluated to zero at a positive observation; "
                "cancellation has destroyed the coefficient sum");
        }
        sum_log_cdf += detail::hypo_log_cdf_raw(rates, c, x, nullptr);
    }
    return -static_cast<double>(s.size()) / sum_log_cdf;
}

// Partial derivative of the log-likelihood in the stage rate alpha_q, holding
// k fixed. The coefficient derivatives come from
//   dA_q/da_q = A_q sum_{v != q} 1/(a_v - a_q)
//   dA_i/da_q = A_i (1/a_q - 1/(a_q - a_i))          for i != q,
// plus the direct dependence of the q-th exponential factor.
inline double score_alpha(const EHypoParams& p, const Sample& s, std::size_t q) {
    const RateVector& r = p.rates();
    const std::size_t n = r.size();
    if (q >= n) {
        throw DomainError("stage index out of range");
    }
    const HypoCoefficients c = hypo_coefficients(r);

    double cross_sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        if (v != q) cross_sum += 1.0 / (r[v] - r[q]);
    }
    std::vector<double> da(n);
    for (std::size_t i = 0; i < n; ++i) {
        da[i] = (i == q) ? c.a[q] * cross_sum
                         : c.a[i] * (1.0 / r[q] - 1.0 / (r[q] - r[i]));
    }

    double pdf_part = 0.0;
    double cdf_part = 0.0;
    for (double x : s.values()) {
        double dens = 0.0, cdf = 0.0, ddens = 0.0, dcdf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double decay = std::exp(-r[i] * x);
            dens += c.a[i] * r[i] * decay;
            cdf += c.a[i] * (1.0 - decay);
            ddens += da[i] * r[i] * decay;
            dcdf += da[i] * (1.0 - decay);
        }
        const double decay_q = std::exp(-r[q] * x);
        ddens += c.a[q] * (1.0 - r[q] * x) * decay_q;
        dcdf += c.a[q] * x * decay_q;
        if (dens <= 0.0 || cdf <= 0.0) {
            throw ConditioningError(
                "mixture sum lost all precision near coalescent rates");
        }
        pdf_part += ddens / dens;
        cdf_part += dcdf / cdf;
    }
    return pdf_part + (p.exponent() - 1.0) * cdf_part;
}

struct FitOptions {
    int max_iterations = 2000;
    double tolerance = 1e-10;
    std::uint64_t seed = 42;
    int starts = 8;
    std::optional<double> fix_k{};
    // Optional user-supplied initial rate guesses (any order; used sorted).
    std::optional<std::vector<double>> initial_rates{};
    // When set, accepted objective improvements (mean log-likelihood scale)
    // are appended here across all starts of the winning phase.
    std::vector<double>* objective_trace = nullptr;
};

struct FitResult {
    EHypoParams params;
    double loglik = -inf;
    bool converged = false;
    int iterations = 0;
    // Euclidean norm of the finite-difference gradient of the profiled
    // objective (mean negative log-likelihood over the sample).
    double gradient_norm = inf;
    std::vector<std::string> warnings;
};

namespace detail {

// Unconstrained coordinates for ordered positive rates:
// a_1 = e^{t_1}, a_i = a_{i-1} (1 + gap_floor) + e^{t_i}. The multiplicative
// floor keeps every consecutive pair at least 1e-6 apart in relative terms,
// clear of the RateVector distinctness bound.
constexpr double rate_gap_floor = 1e-6;

inline std::vector<double> theta_to_rates(const std::vector<double>& theta) {
    std::vector<double> rates(theta.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double gap = std::exp(theta[i]);
        rates[i] = (i == 0) ? gap : prev * (1.0 + rate_gap_floor) + gap;
        prev = rates[i];
    }
    return rates;
}

inline std::vector<double> rates_to_theta(std::vector<double> rates) {
    std::sort(rates.begin(), rates.end());
    std::vector<double> theta(rates.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double gap =
            (i == 0) ? rates[0] : rates[i] - prev * (1.0 + rate_gap_floor);
        theta[i] = std::log(std::max(gap, prev * rate_gap_floor + 1e-300));
        prev = rates[i];
    }
    return theta;
}

} // namespace detail

// Maximum-likelihood fit of an n-stage model by minimizing the mean negative
// profile log-likelihood over the ordered-rate coordinates; k is profiled out
// through its closed form unless opts.fix_k pins it. Multistart simplex
// descent followed by a BFGS polish; deterministic given opts.seed.
inline FitResult fit(const Sample& s, int n, const FitOptions& opts = {}) {
    if (n < 1) {
        throw DomainError("stage count must be >= 1");
    }
    if (s.size() < static_cast<std::size_t>(n) + 2) {
        throw DomainError("need at least n + 2 observations to fit " +
                          std::to_string(n) + " stages");
    }
    if (opts.fix_k && *opts.fix_k <= 0.0) {
        throw DomainError("fixed exponent must be > 0");
    }
    const double big = 1e100;
    const double inv_n_obs = 1.0 / static_cast<double>(s.size());

    const auto objective = [&](const std::vector<double>& theta) -> double {
        for (double t : theta) {
            if (!std::isfinite(t) || std::abs(t) > 700.0) return big;
        }
        std::vector<double> rates = detail::theta_to_rates(theta);
        if (!std::isfinite(rates.back())) return big;
        try {
            RateVector rv(rates);
            const double k = opts.fix_k ? *opts.fix_k : k_hat(rv, s);
            if (!(k > 0.0) || !std::isfinite(k)) return big;
            const double ll = loglik(EHypoParams(rv, k), s);
            if (!std::isfinite(ll)) return big;
            return -ll * inv_n_obs;
        } catch (const DomainError&) {
            return big;
        } catch (const ConditioningError&) {
            return big;
        }
    };

    // Deterministic starts: a quantile-matched rate spread, normalized to
    // center on 1/mean, scaled through geometric factors 0.25..4 and lightly
    // jittered from the seed.
    const double base_rate = 1.0 / s.mean();
    const std::vector<double> sorted = s.sorted();
    std::vector<double> shape(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double prob = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double quant =
            sorted[static_cast<std::size_t>(prob * (static_cast<double>(sorted.size()) - 1.0))];
        shape[static_cast<std::size_t>(i)] = 1.0 / std::max(quant, 1e-12);
    }
    std::sort(shape.begin(), shape.end());
    double log_center = 0.0;
    for (double v : shape) log_center += std::log(v);
    log_center /= static_cast<double>(n);
    for (double& v : shape) v *= base_rate / std::exp(log_center);
    // degenerate quantile spread (heavily tied data): fall back to powers of 3
    for (std::size_t i = 1; i < shape.size(); ++i) {
        if (shape[i] < shape[i - 1] * 1.05) shape[i] = shape[i - 1] * 3.0;
    }

    std::mt19937_64 jitter_gen(opts.seed);
    std::vector<std::vector<double>> starts;
    const int n_starts = std::max(1, opts.starts);
    for (int m = 0; m < n_starts; ++m) {
        const double frac =
            n_starts == 1 ? 0.5 : static_cast<double>(m) / (n_starts - 1.0);
        const double scale = 0.25 * std::pow(16.0, frac);
        std::vector<double> rates = shape;
        for (double& v : rates) {
            const double u =
                (static_cast<double>(jitter_gen() >> 12) + 0.5) * 0x1.0p-52;
            v *= scale * std::exp(0.05 * (2.0 * u - 1.0));
        }
        starts.push_back(detail::rates_to_theta(std::move(rates)));
    }
    if (opts.initial_rates) {
        if (opts.initial_rates->size() != static_cast<std::size_t>(n)) {
            throw DomainError("initial rate guess has wrong length");
        }
        std::vector<double> guess = *opts.initial_rates;
        for (double g : guess) require_positive(g, "initial rate");
        starts.push_back(detail::rates_to_theta(std::move(guess)));
    }

    opt::Options phase;
    phase.max_iterations = opts.max_iterations;
    phase.objective_tolerance = opts.tolerance;
    phase.gradient_tolerance = 1e-6;

    opt::Result best;
    bool have_best = false;
    double best_gradient_norm = inf;
    int best_iterations = 0;
    for (const auto& start : starts) {
        std::vector<double> trace;
        std::vector<double>* trace_ptr = opts.objective_trace ? &trace : nullptr;
        opt::Result coarse = opt::nelder_mead(objective, start, phase, trace_ptr);
        if (coarse.value >= big) continue;
        opt::Result polished = opt::bfgs(objective, coarse.x, phase, trace_ptr);
        const double gnorm = opt::norm2(opt::fd_gradient(objective, polished.x));
        const bool better =
            !have_best || polished.value < best.value ||
            (polished.value == best.value && gnorm < best_gradient_norm);
        if (better) {
            best = polished;
            best_gradient_norm = gnorm;
            best_iterations = coarse.iterations + polished.iterations;
            have_best = true;
        }
        if (opts.objective_trace) {
            // keep only monotone improvements across the concatenated phases
            for (double v : trace) {
                if (opts.objective_trace->empty() || v < opts.objective_trace->back()) {
                    opts.objective_trace->push_back(v);
                }
            }
        }
    }
    if (!have_best) {
        throw FitError("no start produced a finite likelihood; the sample may be "
                       "incompatible with a " +
                       std::to_string(n) + "-stage model");
    }

    std::vector<double> rates = detail::theta_to_rates(best.x);
    FitResult result{
        EHypoParams(RateVector(rates),
                    opts.fix_k ? *opts.fix_k : k_hat(RateVector(rates), s)),
        0.0, false, 0, 0.0, {}};
    EvalFlags flags;
    result.loglik = loglik(result.params, s, &flags);
    result.converged = best.converged;
    result.iterations = best_iterations;
    result.gradient_norm = best_gradient_norm;
    if (flags.conditioning) {
        result.warnings.push_back("conditioning warning during final evaluation");
    }
    for (std::size_t i = 1; i < rates.size(); ++i) {
        const double gap = rates[i] - rates[i - 1];
        if (gap <= 4.0 * detail::rate_gap_floor * rates[i - 1]) {
            result.warnings.push_back("rates nearly coalescent - consider smaller n");
            break;
        }
    }
    return result;
}

} // namespace ehypo
