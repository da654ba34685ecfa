#include "collapse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace collapse::stats {

namespace {

// Cody's rational Chebyshev approximation to erf/erfc (the SPECFUN "calerf"
// coefficient set). erfc_cody(x) is valid for x >= 0.
double erf_small(double x) {
    // |x| <= 0.46875
    static constexpr double a[5] = {3.16112374387056560e+00, 1.13864154151050156e+02,
                                    3.77485237685302021e+02, 3.20937758913846947e+03,
                                    1.85777706184603153e-01};
    static constexpr double b[4] = {2.36012909523441209e+01, 2.44024637934444173e+02,
                                    1.28261652607737228e+03, 2.84423683343917062e+03};
    const double z = x * x;
    double xnum = a[4] * z;
    double xden = z;
    for (int i = 0; i < 3; ++i) {
        xnum = (xnum + a[i]) * z;
        xden = (xden + b[i]) * z;
    }
    return x * (xnum + a[3]) / (xden + b[3]);
}

// exp(-x^2) evaluated as exp(-hi^2)*exp(-(x-hi)(x+hi)) with hi = x rounded
// to 1/16, which keeps the argument errors from amplifying.
double exp_neg_sq(double x) {
    const double hi = std::floor(x * 16.0) / 16.0;
    const double del = (x - hi) * (x + hi);
    return std::exp(-hi * hi) * std::exp(-del);
}

double erfc_mid(double x) {
    // 0.46875 < x <= 4
    static constexpr double c[9] = {5.64188496988670089e-01, 8.88314979438837594e+00,
                                    6.61191906371416295e+01, 2.98635138197400131e+02,
                                    8.81952221241769090e+02, 1.71204761263407058e+03,
                                    2.05107837782607147e+03, 1.23033935479799725e+03,
                                    2.15311535474403846e-08};
    static constexpr double d[8] = {1.57449261107098347e+01, 1.17693950891312499e+02,
                                    5.37181101862009858e+02, 1.62138957456669019e+03,
                                    3.29079923573345963e+03, 4.36261909014324716e+03,
                                    3.43936767414372164e+03, 1.23033935480374942e+03};
    double xnum = c[8] * x;
    double xden = x;
    for (int i = 0; i < 7; ++i) {
        xnum = (xnum + c[i]) * x;
        xden = (xden + d[i]) * x;
    }
    return exp_neg_sq(x) * (xnum + c[7]) / (xden + d[7]);
}

double erfc_large(double x) {
    // x > 4
    static constexpr double p[6] = {3.05326634961232344e-01, 3.60344899949804439e-01,
                                    1.25781726111229246e-01, 1.60837851487422766e-02,
                                    6.58749161529837803e-04, 1.63153871373020978e-02};
    static constexpr double q[5] = {2.56852019228982242e+00, 1.87295284992346047e+00,
                                    5.27905102951428412e-01, 6.05183413124413191e-02,
                                    2.33520497626869185e-03};
    static constexpr double inv_sqrt_pi = 5.6418958354775628695e-01;
    if (x > 26.6) {
        return 0.0;  // below double underflow for erfc
    }
    const double z = 1.0 / (x * x);
    double xnum = p[5] * z;
    double xden = z;
    for (int i = 0; i < 4; ++i) {
        xnum = (xnum + p[i]) * z;
        xden = (xden + q[i]) * z;
    }
    double r = z * (xnum + p[4]) / (xden + q[4]);
    return exp_neg_sq(x) / x * (inv_sqrt_pi - r);
}

double erfc_cody(double x) {
    if (x <= 0.46875) {
        return 1.0 - erf_small(x);
    }
    if (x <= 4.0) {
        return erfc_mid(x);
    }
    return erfc_large(x);
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

double normal_cdf(double x) {
    const double y = -x * kInvSqrt2;
    const double half_erfc = (y >= 0.0) ? 0.5 * erfc_cody(y) : 1.0 - 0.5 * erfc_cody(-y);
    return half_erfc;
}

double normal_quantile(double p) {
    // Wichura (1988), algorithm AS 241, PPND16.
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) *
                        r +
                    4.5921953931549871457e+4) *
                       r +
                   1.3731693765509461125e+4) *
                      r +
                  1.9715909503065514427e+3) *
                     r +
                 1.3314166789178437745e+2) *
                    r +
                3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) *
                        r +
                    2.1213794301586595867e+4) *
                       r +
                   5.3941960214247511077e+3) *
                      r +
                  6.8718700749205790830e+2) *
                     r +
                 4.2313330701600911252e+1) *
                    r +
                1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) *
                       r +
                   1.27045825245236838258e+0) *
                      r +
                  3.64784832476320460504e+0) *
                     r +
                 5.76949722146069140550e+0) *
                    r +
                4.63033784615654529590e+0) *
                   r +
               1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) *
                       r +
                   1.48103976427480074590e-1) *
                      r +
                  6.89767334985100004550e-1) *
                     r +
                 1.67638483018380384940e+0) *
                    r +
                2.05319162663775882187e+0) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) *
                       r +
                   2.65321895265761230930e-2) *
                      r +
                  2.96560571828504891230e-1) *
                     r +
                 1.78482653991729133580e+0) *
                    r +
                5.46378491116411436990e+0) *
                   r +
               6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) *
                       r +
                   7.86869131145613259100e-4) *
                      r +
                  1.48753612908506148525e-2) *
                     r +
                 1.36929880922735805310e-1) *
                    r +
                5.99832206555887937690e-1) *
                   r +
               1.0);
    }
    return (q < 0.0) ? -val : val;
}

double z_for_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("confidence must be in (0,1)");
    }
    return normal_quantile(0.5 + confidence / 2.0);
}

double kolmogorov_tail(double x) {
    if (x <= 0.0) {
        return 1.0;
    }
    if (x < 1.18) {
        // Dual theta-series; converges fast for small x.
        const double t = std::exp(-M_PI * M_PI / (8.0 * x * x));
        const double sum = t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0);
        const double cdf = std::sqrt(2.0 * M_PI) / x * sum;
        return 1.0 - cdf;
    }
    double sum = 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double term = std::exp(-2.0 * double(k) * double(k) * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) {
            break;
        }
    }
    return 2.0 * sum;
}

double kolmogorov_critical(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("kolmogorov_critical: alpha must be in (0,1)");
    }
    double lo = 1e-3;
    double hi = 4.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_tail(mid) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

KsResult ks_test_standard_normal(std::vector<double> values, double alpha) {
    const std::size_t n = values.size();
    if (n == 0) {
        throw std::invalid_argument("ks test: empty sample");
    }
    std::sort(values.begin(), values.end());
    if (values.front() == values.back()) {
        throw std::invalid_argument("ks test: degenerate sample (all values equal)");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = normal_cdf(values[i]);
        const double d_plus = double(i + 1) / double(n) - f;
        const double d_minus = f - double(i) / double(n);
        d = std::max({d, d_plus, d_minus});
    }
    KsResult r;
    r.statistic = d;
    r.n = n;
    r.critical = kolmogorov_critical(alpha) / std::sqrt(double(n));
    r.p_value = kolmogorov_tail(std::sqrt(double(n)) * d);
    r.pass = d < r.critical;
    return r;
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks two-sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
    }
    return d;
}

KsResult ks_two_sample_test(std::vector<double> a, std::vector<double> b, double alpha) {
    const double n = double(a.size());
    const double m = double(b.size());
    KsResult r;
    r.statistic = ks_two_sample_statistic(std::move(a), std::move(b));
    r.n = static_cast<std::size_t>(n);
    const double scale = std::sqrt((n + m) / (n * m));
    r.critical = kolmogorov_critical(alpha) * scale;
    r.p_value = kolmogorov_tail(r.statistic / scale);
    r.pass = r.statistic < r.critical;
    return r;
}

MeanVar mean_var(std::span<const double> xs) {
    MeanVar mv;
    mv.n = xs.size();
    if (mv.n == 0) {
        return mv;
    }
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    for (double x : xs) {
        ++count;
        const double delta = x - mean;
        mean += delta / double(count);
        m2 += delta * (x - mean);
    }
    mv.mean = mean;
    mv.var = (mv.n > 1) ? m2 / double(mv.n - 1) : 0.0;
    mv.se_mean = (mv.n > 1) ? std::sqrt(mv.var / double(mv.n)) : 0.0;
    return mv;
}

std::vector<double> autocorrelations(std::span<const double> xs, int max_lag) {
    const std::size_t n = xs.size();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(max_lag));
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= double(n);
    double denom = 0.0;
    for (double x : xs) {
        denom += (x - mean) * (x - mean);
    }
    for (int lag = 1; lag <= max_lag; ++lag) {
        if (denom == 0.0 || static_cast<std::size_t>(lag) >= n) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double num = 0.0;
        for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < n; ++i) {
            num += (xs[i] - mean) * (xs[i + static_cast<std::size_t>(lag)] - mean);
        }
        out.push_back(num / denom);
    }
    return out;
}

LinFit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) {
        throw std::invalid_argument("least_squares: need matching x/y with n >= 2");
    }
    double xbar = 0.0;
    double ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= double(n);
    ybar /= double(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("least_squares: all x identical");
    }
    LinFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        const double s2 = rss / double(n - 2);
        fit.se_slope = std::sqrt(s2 / sxx);
        fit.se_intercept = std::sqrt(s2 * (1.0 / double(n) + xbar * xbar / sxx));
    }
    return fit;
}

double sorted_sum(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    double sum = 0.0;
    double comp = 0.0;  // Kahan correction
    for (double x : xs) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace collapse::stats
