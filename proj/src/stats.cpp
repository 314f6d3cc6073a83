#include "bugenrich/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bugenrich/error.hpp"

namespace bugenrich::stats {

// ---------------------------------------------------------------------------
// Distributions

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("normal_quantile requires 0 < p < 1");
    // Acklam's rational approximation, then one Halley step on erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw ArgumentError("incomplete_beta requires a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw ArgumentError("degrees of freedom must be > 0");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
    const double tail = student_t_two_sided(t, df) / 2.0;
    return t >= 0.0 ? 1.0 - tail : tail;
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk

namespace {

// cc[0] + cc[1] x + ... + cc[n-1] x^(n-1)
double poly(std::span<const double> cc, double x) {
    double r = 0.0;
    for (auto it = cc.rbegin(); it != cc.rend(); ++it) r = r * x + *it;
    return r;
}

}  // namespace

ShapiroWilk shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) throw ArgumentError("Shapiro-Wilk needs 3 <= n <= 5000, got " + std::to_string(n));
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19)) throw ArgumentError("Shapiro-Wilk is undefined for a constant sample");

    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
    static constexpr double g[] = {-2.273, 0.459};

    const double an = static_cast<double>(n);
    const std::size_t half = n / 2;

    // Antisymmetric coefficients; a[i] pairs x[n-1-i] with x[i].
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first_plain;
        double fac;
        if (n > 5) {
            first_plain = 2;
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            first_plain = 1;
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first_plain; i < half; ++i) a[i] = -m[i] / fac;
    }

    // W as the squared correlation between the coefficients and the sample.
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / an;
    double ssx = 0.0;
    for (double v : x) ssx += (v - mean) * (v - mean);
    double sax = 0.0, ssa = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        sax += a[i] * (x[n - 1 - i] - x[i]);
        ssa += 2.0 * a[i] * a[i];
    }
    double w = sax * sax / (ssa * ssx);
    w = std::min(w, 1.0);
    const double w1 = 1.0 - w;

    ShapiroWilk result{w, 1.0};
    if (n == 3) {
        constexpr double pi6 = 6.0 / std::numbers::pi;
        constexpr double stqr = std::numbers::pi / 3.0;
        result.p = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
        return result;
    }
    if (w1 <= 0.0) return result;
    double y = std::log(w1);
    const double xx = std::log(an);
    double mu, sigma;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) {
            result.p = 1e-99;
            return result;
        }
        y = -std::log(gamma - y);
        mu = poly(c3, an);
        sigma = std::exp(poly(c4, an));
    } else {
        mu = poly(c5, xx);
        sigma = std::exp(poly(c6, xx));
    }
    result.p = normal_sf((y - mu) / sigma);
    return result;
}

// ---------------------------------------------------------------------------
// Paired t

namespace {

std::vector<double> differences(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ArgumentError("paired samples must have equal length");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_variance(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
    const auto d = differences(a, b);
    if (d.size() < 2) throw ArgumentError("paired t test needs at least 2 pairs");
    if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) {
        throw ArgumentError("paired t test is degenerate: all differences are zero");
    }
    const double n = static_cast<double>(d.size());
    const double m = mean_of(d);
    const double sd = std::sqrt(sample_variance(d));
    TTest r;
    r.df = n - 1.0;
    if (sd == 0.0) {
        r.t = m > 0 ? HUGE_VAL : -HUGE_VAL;
        r.p = 0.0;
        return r;
    }
    r.t = m / (sd / std::sqrt(n));
    r.p = student_t_two_sided(r.t, r.df);
    return r;
}

// ---------------------------------------------------------------------------
// Wilcoxon

Wilcoxon wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, WilcoxonMethod method) {
    auto d = differences(a, b);
    std::erase(d, 0.0);
    const std::size_t n = d.size();
    if (n == 0) throw ArgumentError("Wilcoxon test is degenerate: all differences are zero");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });

    // Doubled average ranks stay integral: 2 * (i + 1 + j) / 2.
    std::vector<long long> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
        const auto doubled = static_cast<long long>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) rank2[order[t]] = doubled;
        const double size = static_cast<double>(j - i);
        tie_term += size * size * size - size;
        i = j;
    }

    long long w_plus2 = 0, total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += rank2[i];
        if (d[i] > 0) w_plus2 += rank2[i];
    }
    Wilcoxon r;
    r.n = n;
    r.w_plus = static_cast<double>(w_plus2) / 2.0;
    r.w_minus = static_cast<double>(total2 - w_plus2) / 2.0;
    r.statistic = std::min(r.w_plus, r.w_minus);
    r.signed_statistic = r.w_plus - r.w_minus;

    const bool exact = method == WilcoxonMethod::exact || (method == WilcoxonMethod::automatic && n <= 25);
    r.exact = exact;
    if (exact) {
        if (n > 40) throw ArgumentError("exact Wilcoxon enumeration is limited to n <= 40");
        // count[s]: sign assignments whose positive doubled-rank sum is s.
        std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
        count[0] = 1.0;
        long long reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            reach += rank2[i];
            for (long long s = reach; s >= rank2[i]; --s) {
                count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - rank2[i])];
            }
        }
        const double all = std::ldexp(1.0, static_cast<int>(n));
        double lower = 0.0, upper = 0.0;
        for (long long s = 0; s <= total2; ++s) {
            if (s <= w_plus2) lower += count[static_cast<std::size_t>(s)];
            if (s >= w_plus2) upper += count[static_cast<std::size_t>(s)];
        }
        r.p = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        return r;
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double diff = r.w_plus - mean;
    const double corrected = diff == 0.0 ? 0.0 : diff - 0.5 * (diff > 0 ? 1.0 : -1.0);
    const double z = corrected / std::sqrt(var);
    r.p = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
    return r;
}

// ---------------------------------------------------------------------------
// Effect sizes

std::string_view to_string(Magnitude m) noexcept {
    switch (m) {
        case Magnitude::negligible: return "negligible";
        case Magnitude::small: return "small";
        case Magnitude::medium: return "medium";
        case Magnitude::large: return "large";
    }
    return "negligible";
}

namespace {

Magnitude band(double v, double small, double medium, double large) {
    v = std::abs(v);
    if (v < small) return Magnitude::negligible;
    if (v < medium) return Magnitude::small;
    if (v < large) return Magnitude::medium;
    return Magnitude::large;
}

}  // namespace

EffectSize cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() + b.size() <= 2 || a.empty() || b.empty()) {
        throw ArgumentError("Cohen's d needs non-empty samples with |a| + |b| > 2");
    }
    const double va = a.size() > 1 ? sample_variance(a) : 0.0;
    const double vb = b.size() > 1 ? sample_variance(b) : 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
    if (!(pooled > 0.0)) throw ArgumentError("Cohen's d is undefined when the pooled standard deviation is zero");
    const double d = (mean_of(a) - mean_of(b)) / pooled;
    return {d, band(d, 0.2, 0.5, 0.8)};
}

EffectSize cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ArgumentError("Cliff's delta needs non-empty samples");
    std::vector<double> sorted_b(b.begin(), b.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    long long net = 0;
    for (double x : a) {
        const auto below = std::lower_bound(sorted_b.begin(), sorted_b.end(), x) - sorted_b.begin();
        const auto above = sorted_b.end() - std::upper_bound(sorted_b.begin(), sorted_b.end(), x);
        net += static_cast<long long>(below) - static_cast<long long>(above);
    }
    const double delta = static_cast<double>(net) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    return {delta, band(delta, 0.147, 0.33, 0.474)};
}

// ---------------------------------------------------------------------------
// Pipeline

std::string_view to_string(NormalityTarget t) noexcept {
    return t == NormalityTarget::both_samples ? "both_samples" : "differences";
}

std::optional<NormalityTarget> parse_normality_target(std::string_view s) noexcept {
    if (s == "both_samples") return NormalityTarget::both_samples;
    if (s == "differences") return NormalityTarget::differences;
    return std::nullopt;
}

SignificanceReport significance_pipeline(std::span<const double> a, std::span<const double> b, double alpha,
                                         NormalityTarget target) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    if (a.size() != b.size()) throw ArgumentError("paired samples must have equal length");

    SignificanceReport r;
    r.alpha = alpha;
    // A constant sample is degenerate, not normal: Shapiro-Wilk is undefined
    // there, so it is recorded as p = 0 and routed to the rank-based branch.
    const auto normality = [](std::span<const double> x) {
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        if (x.size() >= 3 && *lo == *hi) return 0.0;
        return shapiro_wilk(x).p;
    };
    if (target == NormalityTarget::both_samples) {
        r.normality_p = {normality(a), normality(b)};
    } else {
        const auto d = differences(a, b);
        r.normality_p = {normality(d)};
    }
    r.normal = std::all_of(r.normality_p.begin(), r.normality_p.end(), [alpha](double p) { return p > alpha; });

    if (r.normal) {
        const auto t = paired_t_test(a, b);
        r.test_name = "paired_t_test";
        r.statistic = t.t;
        r.p_value = t.p;
        r.effect_name = "cohens_d";
        r.effect = cohens_d(a, b);
    } else {
        const auto w = wilcoxon_signed_rank(a, b);
        r.test_name = "wilcoxon_signed_rank";
        r.statistic = w.statistic;
        r.p_value = w.p;
        r.effect_name = "cliffs_delta";
        r.effect = cliffs_delta(a, b);
    }
    return r;
}

}  // namespace bugenrich::stats
