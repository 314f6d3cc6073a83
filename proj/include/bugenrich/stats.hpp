#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Paired-sample significance testing and effect sizes.
namespace bugenrich::stats {

// Distributions --------------------------------------------------------------

double normal_cdf(double z);
/// Upper tail 1 - Phi(z), accurate far into the tail.
double normal_sf(double z);
/// Inverse of normal_cdf for p in (0, 1).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

// Tests ----------------------------------------------------------------------

struct ShapiroWilk {
    double w = 0.0;
    double p = 0.0;
};

/// Royston's AS R94 approximation of the Shapiro-Wilk coefficients and
/// p-value. Throws ArgumentError unless 3 <= n <= 5000 with nonzero range.
ShapiroWilk shapiro_wilk(std::span<const double> sample);

struct TTest {
    double t = 0.0;
    double p = 0.0;  // two-sided
    double df = 0.0;
};

/// Throws ArgumentError on unequal sizes, n < 2 or all-zero differences.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

enum class WilcoxonMethod { automatic, exact, normal };

struct Wilcoxon {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double statistic = 0.0;         // min(W+, W-)
    double signed_statistic = 0.0;  // W+ - W-
    double p = 0.0;                 // two-sided
    std::size_t n = 0;              // non-zero differences
    bool exact = false;
};

/// Zero differences are dropped, tied |d| share the average rank. The exact
/// null distribution is enumerated for n <= 25 (automatic); above that the
/// normal approximation with tie-corrected variance and continuity
/// correction is used. Throws ArgumentError when every difference is zero.
Wilcoxon wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                              WilcoxonMethod method = WilcoxonMethod::automatic);

enum class Magnitude { negligible, small, medium, large };
std::string_view to_string(Magnitude m) noexcept;

struct EffectSize {
    double value = 0.0;
    Magnitude magnitude = Magnitude::negligible;
};

/// (mean a - mean b) / pooled sd; |d| < 0.2 / 0.5 / 0.8 bands.
EffectSize cohens_d(std::span<const double> a, std::span<const double> b);

/// (#{a > b} - #{a < b}) / (|a||b|); |delta| < 0.147 / 0.33 / 0.474 bands.
EffectSize cliffs_delta(std::span<const double> a, std::span<const double> b);

// Pipeline -------------------------------------------------------------------

enum class NormalityTarget { both_samples, differences };
std::string_view to_string(NormalityTarget t) noexcept;
std::optional<NormalityTarget> parse_normality_target(std::string_view s) noexcept;

struct SignificanceReport {
    bool normal = false;
    std::string test_name;    // paired_t_test | wilcoxon_signed_rank
    double statistic = 0.0;
    double p_value = 0.0;
    std::string effect_name;  // cohens_d | cliffs_delta
    EffectSize effect;
    std::vector<double> normality_p;  // one per tested sample
    double alpha = 0.05;
};

/// Shapiro-Wilk on the chosen sample(s); all p > alpha selects the paired t
/// test with Cohen's d, otherwise Wilcoxon with Cliff's delta. A constant
/// sample counts as non-normal (p recorded as 0).
SignificanceReport significance_pipeline(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                                         NormalityTarget target = NormalityTarget::both_samples);

}  // namespace bugenrich::stats
