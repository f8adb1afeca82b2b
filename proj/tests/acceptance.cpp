// Acceptance suite: one check per release criterion, one pass/fail line each.
// Run with no arguments for the full suite or `--only N` for one criterion.
// The process exit code is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "ehypo/ehypo.hpp"
#include "support/oracles.hpp"

namespace {

using namespace ehypo;
using nlohmann::json;

std::string data_path() {
    return std::string(EHYPO_DATA_DIR) + "/bladder_cancer.csv";
}

Sample load_data() {
    std::ifstream in(data_path());
    std::vector<double> values;
    double v = 0.0;
    while (in >> v) values.push_back(v);
    return Sample(std::move(values));
}

bool close_rel(double actual, double expected, double rel) {
    return std::abs(actual - expected) <= rel * std::abs(expected);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

// ---------------------------------------------------------------- criteria

bool coefficient_fixture(std::string& detail) {
    const auto c = hypo_coefficients(RateVector({5.0, 4.0, 3.0}));
    const double expected[3] = {6.0, -15.0, 10.0};
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
        ok = ok && std::abs(c.a[static_cast<std::size_t>(i)] - expected[i]) <= 1e-12;
    }
    detail = "A = (" + fmt(c.a[0]) + ", " + fmt(c.a[1]) + ", " + fmt(c.a[2]) +
             "), expected (6, -15, 10) within 1e-12";
    return ok;
}

double example_cdf(double t) {
    return std::exp(-15.0 * t) * std::pow(std::exp(t) - 1.0, 9.0) *
           std::pow(6.0 + 3.0 * std::exp(t) + std::exp(2.0 * t), 3.0);
}

double example_pdf(double t) {
    return 90.0 * std::exp(-15.0 * t) * std::pow(std::exp(t) - 1.0, 8.0) *
           std::pow(6.0 + 3.0 * std::exp(t) + std::exp(2.0 * t), 2.0);
}

bool pdf_closed_form(std::string& detail) {
    const EHypoParams p({5.0, 4.0, 3.0}, 3.0);
    bool ok = true;
    double worst = 0.0;
    for (double t : {0.3, 0.5, 1.0, 2.0, 2.5}) {
        const double got = ehypo_pdf(p, t);
        const double want = example_pdf(t);
        const double rel = std::abs(got - want) / std::abs(want);
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-9;
    }
    detail = "max relative deviation from the closed form " + fmt(worst) +
             " (tolerance 1e-9)";
    return ok;
}

bool cdf_closed_form(std::string& detail) {
    const EHypoParams p({5.0, 4.0, 3.0}, 3.0);
    bool ok = true;
    double worst = 0.0;
    for (double t : {0.3, 0.5, 1.0, 2.0, 2.5}) {
        const double got = ehypo_cdf(p, t);
        const double want = example_cdf(t);
        const double rel = std::abs(got - want) / std::abs(want);
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-9;
    }
    detail = "max relative deviation from the closed form " + fmt(worst) +
             " (tolerance 1e-9)";
    return ok;
}

bool reliability_point(std::string& detail) {
    const double got = ehypo_survival(EHypoParams({5.0, 4.0, 3.0}, 3.0), 2.0);
    detail = "survival(2) = " + fmt(got) + ", expected 0.0588886 within 5e-4";
    return std::abs(got - 0.0588886) <= 5e-4;
}

struct RandomFamily {
    EHypoParams params;
    EHypoExpansion expansion;
};

std::vector<RandomFamily> random_family(int count, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<RandomFamily> out;
    for (int trial = 0; trial < count; ++trial) {
        const int n = oracle::uniform_int(gen, 1, 4);
        const int k = oracle::uniform_int(gen, 1, 5);
        EHypoParams p(oracle::random_rates(gen, n), static_cast<double>(k));
        EHypoExpansion e = ehypo_expansion(p);
        out.push_back({std::move(p), std::move(e)});
    }
    return out;
}

bool coefficient_sum_property(std::string& detail) {
    double worst = 0.0;
    for (const auto& fam : random_family(200, 101)) {
        worst = std::max(worst, std::abs(fam.expansion.coefficient_sum() - 1.0));
    }
    detail = "max |sum B - 1| over 200 randomized parameter sets = " + fmt(worst) +
             " (tolerance 1e-8)";
    return worst <= 1e-8;
}

bool expansion_power_equivalence(std::string& detail) {
    std::mt19937_64 gen(202);
    double worst = 0.0;
    for (const auto& fam : random_family(200, 303)) {
        for (int j = 0; j < 20; ++j) {
            const double t = oracle::uniform(gen, 0.02, 10.0);
            worst = std::max(worst, std::abs(expansion_cdf(fam.expansion, t) -
                                             ehypo_cdf(fam.params, t)));
            worst = std::max(worst, std::abs(expansion_pdf(fam.expansion, t) -
                                             ehypo_pdf(fam.params, t)));
            worst = std::max(worst, std::abs(expansion_survival(fam.expansion, t) -
                                             ehypo_survival(fam.params, t)));
        }
    }
    detail = "max |expansion - power| over CDF/PDF/survival = " + fmt(worst) +
             " (tolerance 1e-8)";
    return worst <= 1e-8;
}

bool mee_equivalence(std::string& detail) {
    std::mt19937_64 gen(404);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = oracle::uniform_int(gen, 1, 4);
        std::vector<double> exps;
        bool positive = false;
        for (int i = 0; i < n; ++i) {
            const int g = oracle::uniform_int(gen, 0, 6);
            positive = positive || g > 0;
            exps.push_back(g);
        }
        if (!positive) exps[0] = 1.0;
        const MEEParams p(oracle::random_rates(gen, n), exps);
        for (int j = 0; j < 20; ++j) {
            const double t = oracle::uniform(gen, 0.01, 9.0);
            worst = std::max(worst, std::abs(mee_cdf_expanded(p, t) - mee_cdf(p, t)));
        }
    }
    detail = "max |expanded - product| = " + fmt(worst) + " (tolerance 1e-9)";
    return worst <= 1e-9;
}

bool calculus_consistency(std::string& detail) {
    struct Fixture {
        std::function<double(double)> cdf;
        std::function<double(double)> pdf;
        double horizon;
    };
    const RateVector hypo_rates({5.0, 4.0, 3.0});
    const RateVector wide_rates({0.5, 2.0});
    const EEParams ee(2.0, 3.0);
    const MEEParams mee({1.2, 3.0}, {2.0, 1.0});
    const EHypoParams integer_family({5.0, 4.0, 3.0}, 3.0);
    const EHypoParams real_family({0.5, 2.0}, 0.7);
    std::vector<Fixture> fixtures;
    fixtures.push_back({[](double t) { return exp_cdf(1.3, t); },
                        [](double t) { return exp_pdf(1.3, t); }, 50.0 / 1.3});
    fixtures.push_back({[&](double t) { return ee_cdf(ee, t); },
                        [&](double t) { return ee_pdf(ee, t); }, 25.0});
    fixtures.push_back({[&](double t) { return hypo_cdf(hypo_rates, t); },
                        [&](double t) { return hypo_pdf(hypo_rates, t); }, 50.0 / 3.0});
    fixtures.push_back({[&](double t) { return hypo_cdf(wide_rates, t); },
                        [&](double t) { return hypo_pdf(wide_rates, t); }, 100.0});
    fixtures.push_back({[&](double t) { return mee_cdf(mee, t); },
                        [&](double t) { return mee_pdf(mee, t); }, 50.0 / 1.2});
    fixtures.push_back({[&](double t) { return ehypo_cdf(integer_family, t); },
                        [&](double t) { return ehypo_pdf(integer_family, t); },
                        50.0 / 3.0});
    fixtures.push_back({[&](double t) { return ehypo_cdf(real_family, t); },
                        [&](double t) { return ehypo_pdf(real_family, t); }, 100.0});

    double worst_fd = 0.0;
    double worst_mass = 0.0;
    for (const auto& fx : fixtures) {
        for (double t = 0.15; t <= 6.0; t += 0.35) {
            const double fd = oracle::central_difference(fx.cdf, t, 1e-6);
            worst_fd = std::max(worst_fd, std::abs(fd - fx.pdf(t)));
        }
        const double mass = oracle::integrate(fx.pdf, 0.0, fx.horizon, 1e-10);
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    }
    detail = "max |finite difference - pdf| = " + fmt(worst_fd) +
             " (tol 1e-6); max |integral - 1| = " + fmt(worst_mass) + " (tol 1e-7)";
    return worst_fd <= 1e-6 && worst_mass <= 1e-7;
}

bool sampling_soundness(std::string& detail) {
    const double critical = 1.63 / std::sqrt(20000.0);
    const EHypoParams integer_family({5.0, 4.0, 3.0}, 3.0);
    const EHypoParams real_family({0.5, 2.0}, 0.7);

    // integer exponent: max-of-k construction
    const auto construction = ehypo_sample(integer_family, 20000, 7);
    const double d1 = oracle::ks_distance(
        construction, [&](double t) { return ehypo_cdf(integer_family, t); });

    // integer exponent again through the inverse transform, as a cross-check
    // of the same law from the quantile side
    std::vector<double> inverse_draws;
    inverse_draws.reserve(20000);
    {
        std::mt19937_64 gen(7070);
        for (int i = 0; i < 20000; ++i) {
            inverse_draws.push_back(
                ehypo_quantile(integer_family, oracle::uniform(gen, 0.0, 1.0)));
        }
    }
    const double d2 = oracle::ks_distance(
        inverse_draws, [&](double t) { return ehypo_cdf(integer_family, t); });

    // real exponent: inverse transform path inside the sampler
    const auto real_draws = ehypo_sample(real_family, 20000, 11);
    const double d3 = oracle::ks_distance(
        real_draws, [&](double t) { return ehypo_cdf(real_family, t); });

    detail = "KS distances " + fmt(d1) + " (construction), " + fmt(d2) +
             " (inverse, integer k), " + fmt(d3) + " (inverse, real k); critical " +
             fmt(critical);
    return d1 < critical && d2 < critical && d3 < critical;
}

bool mle_reproduction(std::string& detail) {
    const Sample s = load_data();
    const FitResult full = fit(s, 2);
    FitOptions pinned;
    pinned.fix_k = 1.0;
    const FitResult base = fit(s, 2, pinned);

    const double a1 = full.params.rates()[0];
    const double a2 = full.params.rates()[1];
    const double k = full.params.exponent();
    const double neg2_full = -2.0 * full.loglik;
    const double neg2_base = -2.0 * base.loglik;

    const bool a1_ok = close_rel(a1, 0.105418, 0.10);
    const bool a2_ok = close_rel(a2, 0.718769, 0.10);
    const bool k_ok = close_rel(k, 0.51541, 0.10);
    const bool ll_ok = std::abs(neg2_full - 823.33) <= 2.0;
    const bool order_ok = neg2_full < neg2_base;
    const bool base_ok = std::abs(neg2_base - 826.09) <= 2.0;

    std::ostringstream os;
    os << "fitted (a1, a2, k) = (" << fmt(a1) << ", " << fmt(a2) << ", " << fmt(k)
       << ") vs reference (0.105418, 0.718769, 0.51541) at 10%: " << (a1_ok ? "ok" : "FAIL")
       << "/" << (a2_ok ? "ok" : "FAIL") << "/" << (k_ok ? "ok" : "FAIL")
       << "; -2logL = " << fmt(neg2_full) << " vs 823.33 +/- 2: "
       << (ll_ok ? "ok" : "FAIL") << "; below base-model " << fmt(neg2_base)
       << " (826.09 +/- 2): " << ((order_ok && base_ok) ? "ok" : "FAIL");
    if (!a2_ok || !k_ok) {
        const bool swapped_a2 = close_rel(a2, 0.51541, 0.10);
        const bool swapped_k = close_rel(k, 0.718769, 0.10);
        if (swapped_a2 && swapped_k) {
            os << " [note: the fitted (a2, k) pair matches the reference pair "
                  "transposed; the reference triple is not attainable jointly with "
                  "the -2logL reference, which the fit does attain]";
        }
    }
    detail = os.str();
    return a1_ok && a2_ok && k_ok && ll_ok && order_ok && base_ok;
}

bool edf_reproduction(std::string& detail) {
    const Sample s = load_data();
    const FitResult full = fit(s, 2);
    FitOptions pinned;
    pinned.fix_k = 1.0;
    const FitResult base = fit(s, 2, pinned);

    const auto cdf_full = [&](double t) { return ehypo_cdf(full.params, t); };
    const auto cdf_base = [&](double t) { return ehypo_cdf(base.params, t); };
    const auto [a_full, w_full] = edf_statistics(cdf_full, s);
    const auto [a_base, w_base] = edf_statistics(cdf_base, s);

    const bool ok = close_rel(a_full, 0.455972, 0.10) &&
                    close_rel(w_full, 0.0767364, 0.10) &&
                    close_rel(a_base, 0.541467, 0.10) &&
                    close_rel(w_base, 0.0889889, 0.10) && a_full < a_base &&
                    w_full < w_base;
    detail = "exponentiated fit A* = " + fmt(a_full) + " W* = " + fmt(w_full) +
             " (refs 0.455972, 0.0767364); base fit A* = " + fmt(a_base) +
             " W* = " + fmt(w_base) + " (refs 0.541467, 0.0889889); 10% bands";
    return ok;
}

bool mle_self_consistency(std::string& detail) {
    const EHypoParams truth({0.5, 2.0}, 0.7);
    double worst = 0.0;
    bool ok = true;
    std::ostringstream os;
    for (std::uint64_t seed : {1ull, 6ull, 9ull}) {
        const auto draws = ehypo_sample(truth, 5000, seed);
        const FitResult r = fit(Sample(draws), 2);
        const double e1 = std::abs(r.params.rates()[0] - 0.5) / 0.5;
        const double e2 = std::abs(r.params.rates()[1] - 2.0) / 2.0;
        const double ek = std::abs(r.params.exponent() - 0.7) / 0.7;
        worst = std::max({worst, e1, e2, ek});
        ok = ok && e1 <= 0.15 && e2 <= 0.15 && ek <= 0.15;
        os << " seed " << seed << ": errors (" << fmt(e1) << ", " << fmt(e2) << ", "
           << fmt(ek) << ")";
    }
    detail = "true (0.5, 2.0, k=0.7), N = 5000, tolerance 15%:" + os.str();
    return ok;
}

bool stationarity_checks(std::string& detail) {
    std::mt19937_64 gen(1313);
    double worst_k = 0.0;
    double worst_score = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const int n = oracle::uniform_int(gen, 1, 3);
        const RateVector rates(oracle::random_rates(gen, n, 0.3, 5.0));
        std::vector<double> xs;
        for (int i = 0; i < 50; ++i) xs.push_back(oracle::uniform(gen, 0.05, 8.0));
        const Sample s(xs);

        const double kh = k_hat(rates, s);
        double sum_log_cdf = 0.0;
        for (double x : s.values()) sum_log_cdf += hypo_log_cdf(rates, x);
        worst_k = std::max(worst_k,
                           std::abs(static_cast<double>(s.size()) / kh + sum_log_cdf));

        const double k = oracle::uniform(gen, 0.4, 3.0);
        const EHypoParams p(rates, k);
        for (int q = 0; q < n; ++q) {
            const double fd = oracle::central_difference(
                [&](double a) {
                    std::vector<double> perturbed = rates.values();
                    perturbed[static_cast<std::size_t>(q)] = a;
                    return loglik(EHypoParams(perturbed, k), s);
                },
                rates[static_cast<std::size_t>(q)], 1e-6);
            const double score = score_alpha(p, s, static_cast<std::size_t>(q));
            worst_score = std::max(worst_score,
                                   std::abs(score - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    detail = "max |N/k + sum log F| = " + fmt(worst_k) +
             " (tol 1e-10); max relative score deviation = " + fmt(worst_score) +
             " (tol 1e-5)";
    return worst_k <= 1e-10 && worst_score <= 1e-5;
}

bool hazard_shape(std::string& detail) {
    const EHypoParams p({5.0, 4.0, 3.0}, 3.0);
    double prev = -1.0;
    bool increasing = true;
    for (int i = 1; i <= 100; ++i) {
        const double h = ehypo_hazard(p, 0.1 * static_cast<double>(i));
        increasing = increasing && h > prev;
        prev = h;
    }
    detail = std::string("hazard strictly increasing over t = 0.1..10.0 step 0.1: ") +
             (increasing ? "yes" : "no");
    return increasing;
}

struct CliRun {
    int exit_code;
    std::string out;
};

CliRun run_cli(const std::string& args) {
    namespace fs = std::filesystem;
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() / "ehypofit_acceptance";
    fs::create_directories(dir);
    const fs::path out = dir / ("out" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string(EHYPO_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, os.str()};
}

bool cli_contract(std::string& detail) {
    namespace fs = std::filesystem;
    // determinism: repeated invocations are byte-identical
    const std::string eval_args = "eval --rates 5,4,3 --k 3 --grid 0:4:0.125";
    const CliRun e1 = run_cli(eval_args);
    const CliRun e2 = run_cli(eval_args);
    const bool deterministic = e1.exit_code == 0 && e1.out == e2.out;

    const std::string fit_args =
        "fit --data " + data_path() + " --model ehypoexp --n 2 --format json";
    const CliRun f1 = run_cli(fit_args);
    const CliRun f2 = run_cli(fit_args);
    bool fixture_count = false;
    if (f1.exit_code == 0) {
        const json doc = json::parse(f1.out, nullptr, false);
        fixture_count = !doc.is_discarded() && doc["data"]["count"] == 128;
    }
    const bool fit_deterministic = f1.exit_code == 0 && f1.out == f2.out;

    // exit codes: 0 success, 1 config, 2 ingestion, 3 numeric
    const bool code0 = e1.exit_code == 0;
    const bool code1 = run_cli("eval --rates 1,2 --k 1 --grid 0:0:1").exit_code == 1;
    const bool code2 = run_cli("fit --data /nonexistent.csv").exit_code == 2;
    const fs::path dir = fs::temp_directory_path() / "ehypofit_acceptance";
    fs::create_directories(dir);
    const fs::path hopeless = dir / "hopeless.csv";
    {
        // no two-stage rate pair keeps both scale extremes representable,
        // so every start is rejected and the fit fails numerically
        std::ofstream f(hopeless);
        f << "1e-280\n1e280\n1.0\n2.0\n";
    }
    const bool code3 =
        run_cli("fit --data " + hopeless.string() + " --model hypoexp --n 2")
            .exit_code == 3;

    detail = std::string("deterministic eval: ") + (deterministic ? "yes" : "NO") +
             "; deterministic fit: " + (fit_deterministic ? "yes" : "NO") +
             "; fixture count 128: " + (fixture_count ? "yes" : "NO") +
             "; exit codes 0/1/2/3: " + (code0 ? "0" : "x") + (code1 ? "1" : "x") +
             (code2 ? "2" : "x") + (code3 ? "3" : "x");
    return deterministic && fit_deterministic && fixture_count && code0 && code1 &&
           code2 && code3;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--only" && i + 1 < argc) {
            only = std::atoi(argv[i + 1]);
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "coefficient fixture", coefficient_fixture},
        {2, "closed-form density fixture", pdf_closed_form},
        {3, "closed-form CDF fixture", cdf_closed_form},
        {4, "reliability point", reliability_point},
        {5, "coefficient-sum property", coefficient_sum_property},
        {6, "expansion/power equivalence", expansion_power_equivalence},
        {7, "maximum-family expansion equivalence", mee_equivalence},
        {8, "calculus consistency", calculus_consistency},
        {9, "sampling soundness", sampling_soundness},
        {10, "MLE reproduction", mle_reproduction},
        {11, "EDF statistics reproduction", edf_reproduction},
        {12, "MLE self-consistency", mle_self_consistency},
        {13, "stationarity checks", stationarity_checks},
        {14, "hazard shape", hazard_shape},
        {15, "CLI contract", cli_contract},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %02d %s: %s\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
