#include "infrasim/linear_program.hpp"

#include <cmath>
#include <stdexcept>

namespace infrasim
{
    std::size_t
    LinearProgram::add_variable(double lower, double upper, double cost)
    {
        cost_.push_back(cost);
        lower_.push_back(lower);
        upper_.push_back(upper);
        return cost_.size() - 1;
    }

    void
    LinearProgram::add_row(
        std::vector<std::pair<std::size_t, double>> terms,
        RowSense sense,
        double rhs)
    {
        for (auto const& term : terms)
        {
            if (term.first >= cost_.size())
            {
                throw std::out_of_range("row references an unknown variable");
            }
        }
        rows_.push_back({std::move(terms), sense, rhs});
    }

    namespace
    {
        // x_j = offset + sign * y[pos] - y[neg]   (neg only for free variables)
        struct Mapping
        {
            double offset = 0.0;
            double sign = 1.0;
            std::size_t pos = 0;
            std::ptrdiff_t neg = -1;
        };

        class Tableau
        {
        public:
            Tableau(std::size_t rows, std::size_t cols)
                : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0),
                  basis_(rows, 0)
            {
            }

            double& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
            double& rhs(std::size_t i) { return at(i, n_); }
            double& cost(std::size_t j) { return at(m_, j); }
            double& value() { return at(m_, n_); }

            std::size_t rows() const { return m_; }
            std::size_t cols() const { return n_; }
            std::vector<std::size_t>& basis() { return basis_; }

            void
            pivot(std::size_t r, std::size_t c)
            {
                double const p = at(r, c);
                for (std::size_t j = 0; j <= n_; ++j)
                {
                    at(r, j) /= p;
                }
                for (std::size_t i = 0; i <= m_; ++i)
                {
                    if (i == r)
                    {
                        continue;
                    }
                    double const f = at(i, c);
                    if (f == 0.0)
                    {
                        continue;
                    }
                    for (std::size_t j = 0; j <= n_; ++j)
                    {
                        at(i, j) -= f * at(r, j);
                    }
                    at(i, c) = 0.0;
                }
                basis_[r] = c;
            }

            void
            drop_row(std::size_t r)
            {
                std::vector<double> next((m_) * (n_ + 1), 0.0);
                std::size_t k = 0;
                for (std::size_t i = 0; i <= m_; ++i)
                {
                    if (i == r)
                    {
                        continue;
                    }
                    for (std::size_t j = 0; j <= n_; ++j)
                    {
                        next[k * (n_ + 1) + j] = at(i, j);
                    }
                    ++k;
                }
                a_ = std::move(next);
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
                --m_;
            }

            // Bland's rule simplex on the current objective row. Columns at or
            // beyond `limit` never enter. Returns false when unbounded.
            bool
            run(std::size_t limit, double tol)
            {
                for (;;)
                {
                    std::size_t enter = limit;
                    for (std::size_t j = 0; j < limit; ++j)
                    {
                        if (cost(j) < -tol)
                        {
                            enter = j;
                            break;
                        }
                    }
                    if (enter == limit)
                    {
                        return true;
                    }
                    std::size_t leave = m_;
                    double best = 0.0;
                    for (std::size_t i = 0; i < m_; ++i)
                    {
                        double const a = at(i, enter);
                        if (a <= tol)
                        {
                            continue;
                        }
                        double const ratio = rhs(i) / a;
                        if (leave == m_ || ratio < best - tol ||
                            (ratio <= best + tol && basis_[i] < basis_[leave]))
                        {
                            leave = i;
                            best = ratio;
                        }
                    }
                    if (leave == m_)
                    {
                        return false;
                    }
                    pivot(leave, enter);
                }
            }

        private:
            std::size_t m_;
            std::size_t n_;
            std::vector<double> a_;
            std::vector<std::size_t> basis_;
        };
    }

    LpResult
    solve_lp(LinearProgram const& lp, double tol)
    {
        std::size_t const nv = lp.variable_count();
        std::vector<Mapping> map(nv);
        std::size_t ny = 0;

        struct StdRow
        {
            std::vector<std::pair<std::size_t, double>> terms;
            RowSense sense;
            double rhs;
        };
        std::vector<StdRow> rows;

        for (std::size_t j = 0; j < nv; ++j)
        {
            double const lo = lp.lower()[j];
            double const hi = lp.upper()[j];
            if (lo > hi)
            {
                return {LpStatus::infeasible, 0.0, {}};
            }
            Mapping& mp = map[j];
            mp.pos = ny++;
            if (std::isfinite(lo))
            {
                mp.offset = lo;
                if (std::isfinite(hi))
                {
                    rows.push_back(
                        {{{mp.pos, 1.0}}, RowSense::less_equal, hi - lo});
                }
            }
            else if (std::isfinite(hi))
            {
                mp.offset = hi;
                mp.sign = -1.0;
            }
            else
            {
                mp.neg = static_cast<std::ptrdiff_t>(ny++);
            }
        }

        for (auto const& row : lp.rows())
        {
            StdRow r{{}, row.sense, row.rhs};
            for (auto const& [var, coef] : row.terms)
            {
                Mapping const& mp = map[var];
                r.rhs -= coef * mp.offset;
                r.terms.push_back({mp.pos, coef * mp.sign});
                if (mp.neg >= 0)
                {
                    r.terms.push_back({static_cast<std::size_t>(mp.neg), -coef});
                }
            }
            rows.push_back(std::move(r));
        }

        // Normalize to non-negative right-hand sides.
        std::size_t n_slack = 0;
        std::size_t n_art = 0;
        for (auto& r : rows)
        {
            if (r.rhs < 0.0)
            {
                r.rhs = -r.rhs;
                for (auto& t : r.terms)
                {
                    t.second = -t.second;
                }
                if (r.sense == RowSense::less_equal)
                {
                    r.sense = RowSense::greater_equal;
                }
                else if (r.sense == RowSense::greater_equal)
                {
                    r.sense = RowSense::less_equal;
                }
            }
            if (r.sense != RowSense::equal)
            {
                ++n_slack;
            }
            if (r.sense != RowSense::less_equal)
            {
                ++n_art;
            }
        }

        std::size_t const m = rows.size();
        std::size_t const first_art = ny + n_slack;
        Tableau t(m, first_art + n_art);
        std::size_t slack = ny;
        std::size_t art = first_art;
        for (std::size_t i = 0; i < m; ++i)
        {
            auto const& r = rows[i];
            for (auto const& [col, coef] : r.terms)
            {
                t.at(i, col) += coef;
            }
            t.rhs(i) = r.rhs;
            if (r.sense == RowSense::less_equal)
            {
                t.at(i, slack) = 1.0;
                t.basis()[i] = slack++;
            }
            else
            {
                if (r.sense == RowSense::greater_equal)
                {
                    t.at(i, slack++) = -1.0;
                }
                t.at(i, art) = 1.0;
                t.basis()[i] = art++;
            }
        }

        // Phase 1: minimize the sum of artificials.
        if (n_art > 0)
        {
            for (std::size_t i = 0; i < m; ++i)
            {
                if (t.basis()[i] >= first_art)
                {
                    for (std::size_t j = 0; j <= t.cols(); ++j)
                    {
                        if (j < first_art || j == t.cols())
                        {
                            t.at(m, j) -= t.at(i, j);
                        }
                    }
                }
            }
            t.run(t.cols(), tol);
            double const scale = 1.0 + std::abs(t.value());
            if (-t.value() > tol * 1e3 * scale)
            {
                return {LpStatus::infeasible, 0.0, {}};
            }
            // Drive remaining zero-level artificials out of the basis.
            for (std::size_t i = 0; i < t.rows();)
            {
                if (t.basis()[i] < first_art)
                {
                    ++i;
                    continue;
                }
                std::size_t col = first_art;
                for (std::size_t j = 0; j < first_art; ++j)
                {
                    if (std::abs(t.at(i, j)) > tol)
                    {
                        col = j;
                        break;
                    }
                }
                if (col == first_art)
                {
                    t.drop_row(i);  // redundant constraint
                }
                else
                {
                    t.pivot(i, col);
                    ++i;
                }
            }
        }

        // Phase 2 objective in terms of y.
        std::vector<double> cy(first_art, 0.0);
        for (std::size_t j = 0; j < nv; ++j)
        {
            double const c = lp.cost()[j];
            cy[map[j].pos] += c * map[j].sign;
            if (map[j].neg >= 0)
            {
                cy[static_cast<std::size_t>(map[j].neg)] -= c;
            }
        }
        std::size_t const mm = t.rows();
        for (std::size_t j = 0; j <= t.cols(); ++j)
        {
            t.at(mm, j) = j < first_art ? cy[j] : 0.0;
        }
        for (std::size_t i = 0; i < mm; ++i)
        {
            double const cb = cy[t.basis()[i]];
            if (cb == 0.0)
            {
                continue;
            }
            for (std::size_t j = 0; j <= t.cols(); ++j)
            {
                t.at(mm, j) -= cb * t.at(i, j);
            }
        }
        if (!t.run(first_art, tol))
        {
            return {LpStatus::unbounded, 0.0, {}};
        }

        std::vector<double> y(first_art, 0.0);
        for (std::size_t i = 0; i < mm; ++i)
        {
            if (t.basis()[i] < first_art)
            {
                y[t.basis()[i]] = t.rhs(i);
            }
        }
        LpResult res;
        res.status = LpStatus::optimal;
        res.x.resize(nv);
        res.objective = 0.0;
        for (std::size_t j = 0; j < nv; ++j)
        {
            double v = map[j].offset + map[j].sign * y[map[j].pos];
            if (map[j].neg >= 0)
            {
                v -= y[static_cast<std::size_t>(map[j].neg)];
            }
            res.x[j] = v;
            res.objective += lp.cost()[j] * v;
        }
        return res;
    }
}
