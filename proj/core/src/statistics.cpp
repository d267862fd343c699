#include "infrasim/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace infrasim
{
    namespace
    {
        // Modified Lentz evaluation of the incomplete beta continued fraction.
        double
        beta_fraction(double a, double b, double x)
        {
            constexpr double kTiny = 1e-300;
            constexpr double kEps = 1e-16;
            double const qab = a + b;
            double const qap = a + 1.0;
            double const qam = a - 1.0;
            double c = 1.0;
            double d = 1.0 - qab * x / qap;
            if (std::abs(d) < kTiny)
            {
                d = kTiny;
            }
            d = 1.0 / d;
            double h = d;
            for (int m = 1; m <= 10000; ++m)
            {
                double const m2 = 2.0 * m;
                double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
                d = 1.0 + aa * d;
                if (std::abs(d) < kTiny)
                {
                    d = kTiny;
                }
                c = 1.0 + aa / c;
                if (std::abs(c) < kTiny)
                {
                    c = kTiny;
                }
                d = 1.0 / d;
                h *= d * c;
                aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
                d = 1.0 + aa * d;
                if (std::abs(d) < kTiny)
                {
                    d = kTiny;
                }
                c = 1.0 + aa / c;
                if (std::abs(c) < kTiny)
                {
                    c = kTiny;
                }
                d = 1.0 / d;
                double const del = d * c;
                h *= del;
                if (std::abs(del - 1.0) < kEps)
                {
                    break;
                }
            }
            return h;
        }
    }

    double
    incomplete_beta(double a, double b, double x)
    {
        if (!(a > 0.0) || !(b > 0.0) || std::isnan(x))
        {
            throw std::invalid_argument("incomplete_beta needs a, b > 0");
        }
        if (x <= 0.0)
        {
            return 0.0;
        }
        if (x >= 1.0)
        {
            return 1.0;
        }
        double const log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                 a * std::log(x) + b * std::log1p(-x);
        double const front = std::exp(log_front);
        // The fraction converges fast below the mean; use symmetry above it.
        if (x < (a + 1.0) / (a + b + 2.0))
        {
            return front * beta_fraction(a, b, x) / a;
        }
        return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
    }

    double
    student_t_cdf(double t, double df)
    {
        if (!(df > 0.0))
        {
            throw std::invalid_argument("t distribution needs df > 0");
        }
        if (std::isinf(t))
        {
            return t > 0 ? 1.0 : 0.0;
        }
        double const x = df / (df + t * t);
        double const tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
        return t > 0.0 ? 1.0 - tail : tail;
    }

    double
    t_two_sided_p(double t, double df)
    {
        if (!(df > 0.0))
        {
            throw std::invalid_argument("t distribution needs df > 0");
        }
        if (std::isinf(t))
        {
            return 0.0;
        }
        return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    }

    double
    f_survival(double f, double df1, double df2)
    {
        if (!(df1 > 0.0) || !(df2 > 0.0))
        {
            throw std::invalid_argument("F distribution needs positive degrees of freedom");
        }
        if (f <= 0.0)
        {
            return 1.0;
        }
        if (std::isinf(f))
        {
            return 0.0;
        }
        return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
    }

    AnovaResult
    repeated_measures_anova(std::vector<std::vector<double>> const& m)
    {
        if (m.size() < 2 || m.front().size() < 2)
        {
            throw std::invalid_argument("repeated-measures ANOVA needs at least 2 x 2 values");
        }
        std::size_t const n = m.size();
        std::size_t const k = m.front().size();
        for (auto const& row : m)
        {
            if (row.size() != k)
            {
                throw std::invalid_argument("repeated-measures ANOVA needs a complete matrix");
            }
            for (double v : row)
            {
                if (!std::isfinite(v))
                {
                    throw std::invalid_argument("repeated-measures ANOVA needs finite values");
                }
            }
        }
        AnovaResult r;
        r.subjects = n;
        r.treatments = k;
        double total = 0.0;
        std::vector<double> col(k, 0.0);
        std::vector<double> row(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < k; ++j)
            {
                total += m[i][j];
                col[j] += m[i][j];
                row[i] += m[i][j];
            }
        }
        double const N = static_cast<double>(n * k);
        r.grand_mean = total / N;
        for (std::size_t j = 0; j < k; ++j)
        {
            double const d = col[j] / static_cast<double>(n) - r.grand_mean;
            r.ss_treatment += static_cast<double>(n) * d * d;
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            double const d = row[i] / static_cast<double>(k) - r.grand_mean;
            r.ss_subject += static_cast<double>(k) * d * d;
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < k; ++j)
            {
                double const d = m[i][j] - r.grand_mean;
                r.ss_total += d * d;
                double const e = m[i][j] - row[i] / static_cast<double>(k) -
                                 col[j] / static_cast<double>(n) + r.grand_mean;
                r.ss_error += e * e;
            }
        }
        r.df_treatment = static_cast<double>(k - 1);
        r.df_error = static_cast<double>((k - 1) * (n - 1));
        r.ms_treatment = r.ss_treatment / r.df_treatment;
        r.ms_error = r.ss_error / r.df_error;
        // Residual noise relative to the data scale.
        double const scale = std::max(1.0, r.ss_total);
        if (r.ss_error <= 1e-24 * scale)
        {
            if (r.ss_treatment <= 1e-24 * scale)
            {
                r.F = 0.0;
                r.p = 1.0;
            }
            else
            {
                r.F = std::numeric_limits<double>::infinity();
                r.p = 0.0;
                r.degenerate = true;
            }
            return r;
        }
        r.F = r.ms_treatment / r.ms_error;
        r.p = f_survival(r.F, r.df_treatment, r.df_error);
        return r;
    }

    PairedResult
    paired_comparison(std::vector<double> const& a, std::vector<double> const& b)
    {
        if (a.size() != b.size() || a.size() < 2)
        {
            throw std::invalid_argument("paired comparison needs two equal samples of size >= 2");
        }
        PairedResult r;
        r.n = a.size();
        double const n = static_cast<double>(r.n);
        std::vector<double> d(r.n);
        for (std::size_t i = 0; i < r.n; ++i)
        {
            d[i] = a[i] - b[i];
        }
        r.mean_difference = std::accumulate(d.begin(), d.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : d)
        {
            ss += (x - r.mean_difference) * (x - r.mean_difference);
        }
        r.sd_difference = std::sqrt(ss / (n - 1.0));
        r.df = n - 1.0;
        if (r.sd_difference == 0.0)
        {
            if (r.mean_difference == 0.0)
            {
                r.t = 0.0;
                r.p = 1.0;
            }
            else
            {
                r.t = std::copysign(std::numeric_limits<double>::infinity(), r.mean_difference);
                r.p = 0.0;
                r.degenerate = true;
            }
        }
        else
        {
            r.t = r.mean_difference / (r.sd_difference / std::sqrt(n));
            r.p = t_two_sided_p(r.t, r.df);
        }
        r.p_adjusted = r.p;
        return r;
    }

    std::vector<double>
    benjamini_hochberg(std::vector<double> const& p)
    {
        std::size_t const m = p.size();
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return p[x] < p[y]; });
        std::vector<double> out(m);
        double running = 1.0;
        for (std::size_t r = m; r-- > 0;)
        {
            double const v = p[idx[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
            running = std::min(running, v);
            out[idx[r]] = std::min(1.0, running);
        }
        return out;
    }
}
