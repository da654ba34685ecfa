// Acceptance suite: one pass/fail line per criterion, pinned seeds
// throughout. Criterion 11 (determinism across reruns and worker counts)
// drives the CLI binary, whose path arrives as argv[1].

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "collapse/oracle.hpp"
#include "collapse/process.hpp"
#include "collapse/queue.hpp"
#include "collapse/regen.hpp"
#include "collapse/scaling.hpp"
#include "collapse/stats.hpp"

using namespace collapse;
namespace fs = std::filesystem;

namespace {

constexpr int kWorkers = 2;

// Pinned acceptance seeds. Statistical criteria are expected to pass at
// their stated tolerances; a seed is only ever replaced by a documented
// alternate, never by loosening a threshold.
constexpr std::uint64_t kSeedCoupling = 101;
constexpr std::uint64_t kSeedBusy1 = 201, kSeedBusy2 = 202;
constexpr std::uint64_t kSeedMu1 = 303;
constexpr std::uint64_t kSeedZeta = 404;
constexpr std::uint64_t kSeedMu9 = 505;
constexpr std::uint64_t kSeedMu5 = 606;
constexpr std::uint64_t kSeedMu20 = 707;
constexpr std::uint64_t kSeedCycles05 = 808, kSeedMarginal = 809;
constexpr std::uint64_t kSeedRecur = 909;

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, const std::string& name, bool pass, const std::string& details,
            double seconds) {
    std::printf("criterion %2d [%s] %s: %s (%.1f s)\n", id, pass ? "PASS" : "FAIL",
                name.c_str(), details.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) {
        ++g_failures;
    }
}

ModelParams params_1d(double lambda, double p, double mu) {
    ModelParams params;
    params.lambda = lambda;
    params.p = p;
    params.mu = mu;
    return params;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

bool mean_zero_at(const std::vector<RegenerationSample>& samples, const char* label,
                  std::string& detail) {
    const auto rep = mean_increment_zero_test(samples, 0.99);
    detail += fmt("%s mean=%.2e in [%.2e, %.2e]; ", label, rep.mean[0], rep.lo[0],
                  rep.hi[0]);
    return rep.pass;
}

// ---------------------------------------------------------------------- 1
void criterion_1_coupling() {
    Timer timer;
    const auto params = params_1d(1, 0.5, 1);
    std::uint64_t violations = 0;
    const std::uint64_t runs = 10000;
    for (std::uint64_t r = 0; r < runs; ++r) {
        const auto rec =
            coupled_run(params, derive_seed(kSeedCoupling, r), 100.0, /*record=*/false);
        violations += rec.violations;
    }
    const double secs = timer.seconds();
    report(1, "coupling invariant b<=Q", violations == 0 && secs < 60.0,
           fmt("%llu violations in %llu runs at (1,0.5,1) horizon 100",
               (unsigned long long)violations, (unsigned long long)runs),
           secs);
}

// ---------------------------------------------------------------------- 2
void criterion_2_busy_cycle() {
    Timer timer;
    const auto e1 = busy_cycle_mean(1.0, 1.0, 100000, kSeedBusy1);
    const double dev1 = std::abs(e1.mean - std::exp(1.0)) / e1.se;
    const auto e2 = busy_cycle_mean(2.0, 1.0, 100000, kSeedBusy2);
    const double dev2 = std::abs(e2.mean - std::exp(2.0) / 2.0) / e2.se;
    const double secs = timer.seconds();
    report(2, "busy-cycle formula E(T)=exp(lp/mu)/(lp)",
           dev1 <= 3.0 && dev2 <= 3.0 && secs < 60.0,
           fmt("lp=1: %.5f vs e (%.2f se); lp=2: %.5f vs e^2/2 (%.2f se)", e1.mean, dev1,
               e2.mean, dev2),
           secs);
}

// ------------------------------------------------------------------- 3 + 9a
bool criterion_3_regen_bound(std::string& zero_detail, bool& zero_pass) {
    Timer timer;
    const auto params = params_1d(1, 1, 1);
    CollectOptions options;
    options.workers = kWorkers;
    const auto result = collect(params, 100000, kSeedMu1, options);
    const auto est = estimate(result.samples, 0.99);
    const auto bounds = check_bounds(est, result.samples, params);

    const bool alpha_ok = est.alpha_hat + 3.0 * est.se_alpha <= std::exp(1.0);
    const bool mean_abs_ok = bounds.mean_abs_bound.margin_se >= -3.0;
    zero_pass = mean_zero_at(result.samples, "(1,1,1)", zero_detail) && zero_pass;
    report(3, "regeneration bound E(tau)<=e",
           alpha_ok && mean_abs_ok && result.truncated == 0,
           fmt("alpha=%.5f+3*%.5f vs e=%.5f; mean|dX| margin %.1f se", est.alpha_hat,
               est.se_alpha, std::exp(1.0), bounds.mean_abs_bound.margin_se),
           timer.seconds());
    return alpha_ok && mean_abs_ok;
}

// ---------------------------------------------------------------------- 4
void criterion_4_zeta() {
    Timer timer;
    const auto params = params_1d(1, 1, 10);
    const auto zs = collect_zeta(params, 1000000, kSeedZeta, kWorkers);
    std::vector<double> ts(zs.size());
    std::vector<double> x2(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) {
        ts[i] = zs[i].t;
        x2[i] = double(zs[i].x) * double(zs[i].x);
    }
    const auto mt = stats::mean_var(ts);
    const auto mx = stats::mean_var(x2);
    const double dev_t = std::abs(mt.mean - 12.0 / 11.0) / mt.se_mean;
    const double dev_x = std::abs(mx.mean - 14.0 / 11.0) / mx.se_mean;
    const double secs = timer.seconds();
    report(4, "zeta closed forms (mu=10)", dev_t <= 3.0 && dev_x <= 3.0 && secs < 120.0,
           fmt("E(zeta)=%.6f vs 12/11 (%.2f se); E(X^2)=%.6f vs 14/11 (%.2f se)", mt.mean,
               dev_t, mx.mean, dev_x),
           secs);
}

// ------------------------------------------------------------------- 5 + 9b
void criterion_5_positivity(std::string& zero_detail, bool& zero_pass) {
    Timer timer;
    const auto params = params_1d(1, 1, 9);
    CollectOptions options;
    options.workers = kWorkers;
    const auto result = collect(params, 1000000, kSeedMu9, options);
    std::size_t moved = 0;
    for (const auto& s : result.samples) {
        if (s.l1() >= 1) {
            ++moved;
        }
    }
    const double n = double(result.samples.size());
    const double f = double(moved) / n;
    const double se = std::sqrt(f * (1.0 - f) / n);
    const double target = 0.9;  // p*mu/(lambda+mu)
    zero_pass = mean_zero_at(result.samples, "(1,1,9)", zero_detail) && zero_pass;
    report(5, "positivity P(|dX|>=1) >= p mu/(l+mu)", f >= target - 3.0 * se,
           fmt("freq=%.5f vs 0.9 - 3*%.5f", f, se), timer.seconds());
}

// ------------------------------------------------------------------- 6 + 9c
void criterion_6_oracle_equivalence(std::string& zero_detail, bool& zero_pass) {
    Timer timer;
    const auto params = params_1d(1, 1, 5);
    const int depth = 60;
    const auto enc = enumerate_cycle(params, depth, 1e-9, 1e-16);
    const bool residual_ok = enc.alpha.residual_mass <= 1e-8;

    CollectOptions options;
    options.workers = kWorkers;
    const auto result = collect(params, 1000000, kSeedMu5, options);
    std::vector<double> taus(result.samples.size());
    std::vector<double> x2(result.samples.size());
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
        taus[i] = result.samples[i].delta_tau;
        const double dx = double(result.samples[i].delta_x[0]);
        x2[i] = dx * dx;
    }
    const auto mt = stats::mean_var(taus);
    const auto mx = stats::mean_var(x2);
    // unabsorbed remainder allowance: residual mass times a per-path scale
    // cap (depth holding times for alpha, depth^2 displacement^2); reported,
    // far below the Monte Carlo standard errors
    const double slack_alpha = enc.alpha.residual_mass * double(depth) / params.lambda;
    const double slack_x2 = enc.x2.residual_mass * double(depth) * double(depth);
    const double dev_a = std::abs(mt.mean - enc.alpha.absorbed_value);
    const double dev_x = std::abs(mx.mean - enc.x2.absorbed_value);
    const bool alpha_ok = dev_a <= 3.0 * mt.se_mean + slack_alpha;
    const bool x2_ok = dev_x <= 3.0 * mx.se_mean + slack_x2;
    zero_pass = mean_zero_at(result.samples, "(1,1,5)", zero_detail) && zero_pass;
    const double secs = timer.seconds();
    report(6, "oracle equivalence at (1,1,5)",
           residual_ok && alpha_ok && x2_ok && secs < 300.0,
           fmt("residual=%.1e; alpha %.6f vs %.6f (%.2f se); EX^2 %.6f vs %.6f (%.2f se)",
               enc.alpha.residual_mass, mt.mean, enc.alpha.absorbed_value,
               dev_a / mt.se_mean, mx.mean, enc.x2.absorbed_value, dev_x / mx.se_mean),
           secs);
}

// ------------------------------------------------------------------- 7 + 9d
void criterion_7_enhanced_diffusion(std::string& zero_detail, bool& zero_pass) {
    Timer timer;
    const auto params = params_1d(1, 1, 20);
    CollectOptions options;
    options.workers = kWorkers;
    const auto result = collect(params, 1000000, kSeedMu20, options);
    const auto est = estimate(result.samples, 0.99);
    const auto rep = baseline_compare(est, params);
    zero_pass = mean_zero_at(result.samples, "(1,1,20)", zero_detail) && zero_pass;
    report(7, "enhanced diffusion: 99% CI above 1", rep.faster,
           fmt("beta^2/alpha = %.5f, CI [%.5f, %.5f]", rep.ratio, rep.lo, rep.hi),
           timer.seconds());
}

// ------------------------------------------------------------------- 8 + 9e
void criterion_8_clt(std::string& zero_detail, bool& zero_pass) {
    Timer timer;
    const auto params = params_1d(1, 0.5, 1);
    CollectOptions options;
    options.workers = kWorkers;
    const auto result = collect(params, 1000000, kSeedCycles05, options);
    const auto est = estimate(result.samples, 0.99);
    zero_pass = mean_zero_at(result.samples, "(1,0.5,1)", zero_detail) && zero_pass;

    const std::uint64_t n = 10000;
    const auto ms = marginal_samples(params, n, 1.0, 10000, kSeedMarginal, kWorkers);
    const auto ks = clt_test(ms.values[0], est.coeff, 1.0, 0.01);

    const std::vector<double> grid{1000, 2000, 4000, 7000, 10000};
    const auto curve = variance_linearity(params, grid, 10000,
                                          derive_seed(kSeedMarginal, 0x51), kWorkers);
    const double slope_rel = std::abs(curve.fit.slope - est.coeff) / est.coeff;

    const double secs = timer.seconds();
    report(8, "CLT marginal + variance linearity",
           ks.pass && slope_rel <= 0.05 && secs < 600.0,
           fmt("KS D=%.5f < %.5f; slope %.4f vs coeff %.4f (%.1f%%)", ks.statistic,
               ks.critical, curve.fit.slope, est.coeff, 100.0 * slope_rel),
           secs);
}

// ---------------------------------------------------------------------- 10
void criterion_10_recurrence() {
    Timer timer;
    const auto params = params_1d(1, 0.5, 1);
    const std::vector<double> horizons{100, 1000, 10000};
    const auto rs = recurrence_stats(params, horizons, 10000, kSeedRecur, kWorkers);
    bool monotone = true;
    for (std::size_t i = 1; i < rs.fraction_returned.size(); ++i) {
        monotone = monotone && rs.fraction_returned[i] >= rs.fraction_returned[i - 1];
    }
    ModelParams base = params;
    base.p = 0.0;
    const auto baseline = recurrence_stats(base, {100.0}, 10000, kSeedRecur, kWorkers);
    const double base_frac = baseline.fraction_returned.front();
    const bool beats = rs.fraction_returned.back() >= base_frac;
    report(10, "recurrence: monotone and meets free-walk baseline", monotone && beats,
           fmt("fractions %.4f/%.4f/%.4f; p=0 baseline@100 %.4f", rs.fraction_returned[0],
               rs.fraction_returned[1], rs.fraction_returned[2], base_frac),
           timer.seconds());
}

// ---------------------------------------------------------------------- 11
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_11_determinism(const std::string& tool) {
    Timer timer;
    const fs::path dir = fs::temp_directory_path() / "collapse_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);

    struct Cmd {
        std::string name;
        std::string args;
    };
    const std::vector<Cmd> cmds{
        {"simulate", "simulate --lambda 1 --p 1 --mu 10 --horizon 200 --seed 9"},
        {"regen", "regen --lambda 1 --p 1 --mu 2 --cycles 2000 --seed 9"},
        {"queue", "queue --lambda 1 --p 1 --mu 1 --cycles 2000 --horizon 500 --seed 9"},
        {"couple", "couple --lambda 1 --p 0.5 --mu 1 --replicas 50 --horizon 50 --seed 9"},
        {"oracle", "oracle --lambda 1 --p 1 --mu 5 --depth 30 --seed 9"},
        {"clt",
         "clt --lambda 1 --p 0.5 --mu 1 --n 100 --t 1 --replicas 200 --coeff 1.1 --seed 9"},
        {"recur", "recur --lambda 1 --p 0.5 --mu 1 --horizon 1000 --replicas 300 --seed 9"},
        {"compare", "compare --lambda 1 --p 1 --mu 20 --cycles 2000 --seed 9"},
    };

    bool all_ok = true;
    std::string detail;
    for (const auto& cmd : cmds) {
        bool cmd_ok = true;
        std::vector<std::string> csvs, jsons;
        for (int variant = 0; variant < 3; ++variant) {
            // run 0 and 1: workers 1 (rerun); run 2: workers 8
            const int workers = (variant == 2) ? 8 : 1;
            const std::string base =
                (dir / (cmd.name + "_" + std::to_string(variant))).string();
            const std::string full = tool + " " + cmd.args + " --workers " +
                                     std::to_string(workers) + " --out " + base +
                                     " >/dev/null 2>&1";
            // at these toy scales a command may exit 1 (its own statistical
            // checks are underpowered); determinism is about the bytes, so
            // only a config error or crash invalidates the run
            const int rc = WEXITSTATUS(std::system(full.c_str()));
            if (rc != 0 && rc != 1) {
                cmd_ok = false;
            }
            csvs.push_back(fs::exists(base + ".csv") ? slurp(base + ".csv") : "");
            jsons.push_back(slurp(base + ".json"));
        }
        cmd_ok = cmd_ok && csvs[0] == csvs[1] && csvs[0] == csvs[2] &&
                 jsons[0] == jsons[1] && jsons[0] == jsons[2];
        if (!cmd_ok) {
            detail += cmd.name + " differs; ";
            all_ok = false;
        }
    }
    if (all_ok) {
        detail = "8 commands byte-identical across reruns and workers 1 vs 8";
    }
    report(11, "determinism of every command", all_ok, detail, timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
    const std::string tool = (argc > 1) ? argv[1] : "";

    criterion_1_coupling();
    criterion_2_busy_cycle();

    std::string zero_detail;
    bool zero_pass = true;
    criterion_3_regen_bound(zero_detail, zero_pass);
    criterion_4_zeta();
    criterion_5_positivity(zero_detail, zero_pass);
    criterion_6_oracle_equivalence(zero_detail, zero_pass);
    criterion_7_enhanced_diffusion(zero_detail, zero_pass);
    criterion_8_clt(zero_detail, zero_pass);
    report(9, "zero-mean displacement at every acceptance point", zero_pass, zero_detail,
           0.0);
    criterion_10_recurrence();

    if (tool.empty()) {
        report(11, "determinism of every command", false, "binary path not supplied", 0.0);
    } else {
        criterion_11_determinism(tool);
    }

    std::printf("%s: %d/11 criteria passed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
