#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ehypo/common.hpp"
#include "ehypo/fit.hpp"

namespace ehypo {

struct InformationCriteria {
    double aic;
    double aicc;
    double bic;
};

// AIC = -2 logL + 2c, AICC = AIC + 2c(c+1)/(v-c-1), BIC = -2 logL + c log v.
inline InformationCriteria information_criteria(double loglik, int c, int v) {
    require_finite(loglik, "log-likelihood");
    if (c < 0) throw DomainError("parameter count must be >= 0");
    if (v <= c + 1) {
        throw DomainError("AICC needs sample size v > c + 1");
    }
    const double neg2 = -2.0 * loglik;
    const double aic = neg2 + 2.0 * c;
    const double aicc = aic + 2.0 * c * (c + 1.0) / (static_cast<double>(v) - c - 1.0);
    const double bic = neg2 + c * std::log(static_cast<double>(v));
    return {aic, aicc, bic};
}

using CdfEvaluator = std::function<double(double)>;

// Single-sample Anderson-Darling and Cramer-von Mises statistics from the
// probability integral transform of the ascending order statistics:
//   W = sum_i (u_(i) - (2i-1)/(2N))^2 + 1/(12N)
//   A = -N - (1/N) sum_i (2i-1) [ln u_(i) + ln(1 - u_(N+1-i))]
// CDF values are clamped to [1e-15, 1-1e-15] before the logs; hitting the
// clamp marks tail degeneracy.
inline std::pair<double, double> edf_statistics(const CdfEvaluator& cdf,
                                                const Sample& s,
                                                EvalFlags* flags = nullptr) {
    const std::vector<double> sorted = s.sorted();
    const std::size_t n = sorted.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = cdf(sorted[i]);
        if (!std::isfinite(v)) {
            throw DomainError("CDF evaluator returned a non-finite value");
        }
        if (v <= 1e-15 || v >= 1.0 - 1e-15) {
            set_flag(flags, &EvalFlags::tail_degeneracy);
            v = std::clamp(v, 1e-15, 1.0 - 1e-15);
        }
        u[i] = v;
    }
    std::sort(u.begin(), u.end());
    const double nd = static_cast<double>(n);
    double w = 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double plotting = (2.0 * (static_cast<double>(i) + 1.0) - 1.0) / (2.0 * nd);
        const double dev = u[i] - plotting;
        w += dev * dev;
        a += (2.0 * (static_cast<double>(i) + 1.0) - 1.0) *
             (std::log(u[i]) + std::log1p(-u[n - 1 - i]));
    }
    w += 1.0 / (12.0 * nd);
    a = -nd - a / nd;
    return {a, w};
}

struct GofReport {
    double neg2loglik;
    double aic;
    double aicc;
    double bic;
    double a_star;
    double w_star;
    int c;
    int v;
};

inline GofReport make_gof_report(double loglik, int c, const CdfEvaluator& cdf,
                                 const Sample& s, EvalFlags* flags = nullptr) {
    const InformationCriteria ic = information_criteria(loglik, c, static_cast<int>(s.size()));
    const auto [a_star, w_star] = edf_statistics(cdf, s, flags);
    return {-2.0 * loglik, ic.aic,  ic.aicc,          ic.bic,
            a_star,        w_star, c, static_cast<int>(s.size())};
}

// A fitted model handed to compare(): evaluator plus its achieved
// log-likelihood and parameter count.
struct ModelFit {
    std::string name;
    CdfEvaluator cdf;
    double loglik;
    int c;
};

struct ComparisonRow {
    std::string name;
    GofReport report;
    // competition ranks, 1 = best (lowest) per criterion
    int rank_neg2loglik;
    int rank_aic;
    int rank_aicc;
    int rank_bic;
    int rank_a_star;
    int rank_w_star;
};

// One report per model, ranked per criterion, rows ordered by (AIC, name).
inline std::vector<ComparisonRow> compare(const std::vector<ModelFit>& models,
                                          const Sample& s) {
    if (models.size() < 2) {
        throw DomainError("comparison needs at least two models");
    }
    std::vector<ComparisonRow> rows;
    rows.reserve(models.size());
    for (const ModelFit& m : models) {
        rows.push_back({m.name, make_gof_report(m.loglik, m.c, m.cdf, s),
                        0, 0, 0, 0, 0, 0});
    }
    const auto rank_by = [&](auto field, int ComparisonRow::*rank) {
        for (auto& row : rows) {
            int r = 1;
            for (const auto& other : rows) {
                if (field(other.report) < field(row.report)) ++r;
            }
            row.*rank = r;
        }
    };
    rank_by([](const GofReport& g) { return g.neg2loglik; }, &ComparisonRow::rank_neg2loglik);
    rank_by([](const GofReport& g) { return g.aic; }, &ComparisonRow::rank_aic);
    rank_by([](const GofReport& g) { return g.aicc; }, &ComparisonRow::rank_aicc);
    rank_by([](const GofReport& g) { return g.bic; }, &ComparisonRow::rank_bic);
    rank_by([](const GofReport& g) { return g.a_star; }, &ComparisonRow::rank_a_star);
    rank_by([](const GofReport& g) { return g.w_star; }, &ComparisonRow::rank_w_star);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) {
                         if (a.report.aic != b.report.aic) {
                             return a.report.aic < b.report.aic;
                         }
                         return a.name < b.name;
                     });
    return rows;
}

} // namespace ehypo
