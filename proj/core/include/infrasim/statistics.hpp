#pragma once

#include <string>
#include <vector>

namespace infrasim
{
    /// Regularized incomplete beta I_x(a, b) by continued fraction.
    double incomplete_beta(double a, double b, double x);

    /// Student t cumulative distribution.
    double student_t_cdf(double t, double df);

    /// Two-sided p-value of a t statistic.
    double t_two_sided_p(double t, double df);

    /// Upper tail P(F > f) of the F distribution.
    double f_survival(double f, double df1, double df2);

    struct AnovaResult
    {
        std::size_t subjects = 0;    ///< n (scenarios)
        std::size_t treatments = 0;  ///< k (strategies)
        double grand_mean = 0.0;
        double ss_treatment = 0.0;
        double ss_subject = 0.0;
        double ss_error = 0.0;  ///< subject x treatment residual
        double ss_total = 0.0;
        double df_treatment = 0.0;  ///< k - 1
        double df_error = 0.0;      ///< (k - 1)(n - 1)
        double ms_treatment = 0.0;
        double ms_error = 0.0;
        double F = 0.0;
        double p = 1.0;
        /// Zero residual with treatment differences: F is +inf.
        bool degenerate = false;
    };

    /// One-way repeated-measures ANOVA on `matrix[subject][treatment]`.
    /// Throws std::invalid_argument unless the matrix is complete with at
    /// least two rows and two columns.
    AnovaResult repeated_measures_anova(std::vector<std::vector<double>> const& matrix);

    struct PairedResult
    {
        std::size_t n = 0;
        double mean_difference = 0.0;  ///< mean of a - b
        double sd_difference = 0.0;
        double t = 0.0;
        double df = 0.0;
        double p = 1.0;
        double p_adjusted = 1.0;  ///< filled by benjamini_hochberg
        /// Constant non-zero differences: t is infinite.
        bool degenerate = false;
    };

    /// Paired-sample t test on a - b. Throws std::invalid_argument for unequal
    /// lengths or fewer than two pairs.
    PairedResult paired_comparison(std::vector<double> const& a, std::vector<double> const& b);

    /// Benjamini-Hochberg step-up adjusted p-values, in input order.
    std::vector<double> benjamini_hochberg(std::vector<double> const& p);
}
