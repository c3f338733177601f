#include "scfa/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace scfa {

namespace {

constexpr int kMaxGammaIter = 500;
constexpr double kGammaEps = 1e-16;

// Lower incomplete gamma by power series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxGammaIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by Lentz continued fraction, valid for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxGammaIter; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kGammaEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Acklam rational approximation to the normal quantile (error ~1.15e-9
// before refinement).
double normal_quantile_approx(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("regularized_gamma_p: a must be > 0");
    if (x < 0.0) throw std::domain_error("regularized_gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must be in (0,1)");
    double x = normal_quantile_approx(p);
    // One Halley refinement against the erfc-based CDF.
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double chi_square_cdf(double x, int k) {
    if (k < 1) throw std::domain_error("chi_square_cdf: df must be >= 1");
    if (x < 0.0) throw std::domain_error("chi_square_cdf: x must be >= 0");
    return regularized_gamma_p(0.5 * k, 0.5 * x);
}

double chi_square_inv(double p, int k) {
    if (k < 1) throw std::domain_error("chi_square_inv: df must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("chi_square_inv: p must be in (0,1)");

    // Bracket the root, starting from the Wilson-Hilferty estimate.
    double kd = static_cast<double>(k);
    double z = normal_quantile(p);
    double wh = 1.0 - 2.0 / (9.0 * kd) + z * std::sqrt(2.0 / (9.0 * kd));
    double x = kd * wh * wh * wh;
    if (!(x > 0.0)) x = 0.5 * kd;

    double lo = 0.0, hi = x;
    while (chi_square_cdf(hi, k) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    if (chi_square_cdf(lo, k) > p) lo = 0.0;

    // Bisection with Newton acceleration; density is the Newton slope.
    double lgamma_half_k = std::lgamma(0.5 * kd);
    auto pdf = [&](double t) {
        if (t <= 0.0) return 0.0;
        return std::exp((0.5 * kd - 1.0) * std::log(t) - 0.5 * t -
                        0.5 * kd * std::log(2.0) - lgamma_half_k);
    };
    x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double f = chi_square_cdf(x, k) - p;
        if (f > 0.0) hi = x; else lo = x;
        double deriv = pdf(x);
        double step = deriv > 0.0 ? f / deriv : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) < 1e-14 * (1.0 + std::fabs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

double sidak_level(double alpha, long d) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("sidak_level: alpha must be in (0,1)");
    if (d < 1) throw std::domain_error("sidak_level: d must be >= 1");
    // 1 - (1-a)^(1/d) via expm1/log1p to keep precision for large d.
    return -std::expm1(std::log1p(-alpha) / static_cast<double>(d));
}

}  // namespace scfa
