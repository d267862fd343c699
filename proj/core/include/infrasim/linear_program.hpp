#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace infrasim
{
    enum class RowSense
    {
        less_equal,
        equal,
        greater_equal,
    };

    /// minimize c'x  subject to  rows,  lower <= x <= upper.
    /// Bounds may be infinite.
    class LinearProgram
    {
    public:
        static constexpr double kInf = std::numeric_limits<double>::infinity();

        struct Row
        {
            std::vector<std::pair<std::size_t, double>> terms;
            RowSense sense = RowSense::less_equal;
            double rhs = 0.0;
        };

        std::size_t add_variable(double lower, double upper, double cost);
        void add_row(
            std::vector<std::pair<std::size_t, double>> terms,
            RowSense sense,
            double rhs);
        void set_cost(std::size_t var, double cost) { cost_.at(var) = cost; }

        std::size_t variable_count() const { return cost_.size(); }
        std::vector<double> const& cost() const { return cost_; }
        std::vector<double> const& lower() const { return lower_; }
        std::vector<double> const& upper() const { return upper_; }
        std::vector<Row> const& rows() const { return rows_; }

    private:
        std::vector<double> cost_;
        std::vector<double> lower_;
        std::vector<double> upper_;
        std::vector<Row> rows_;
    };

    enum class LpStatus
    {
        optimal,
        infeasible,
        unbounded,
    };

    struct LpResult
    {
        LpStatus status = LpStatus::infeasible;
        double objective = 0.0;
        std::vector<double> x;
    };

    /// Dense two-phase tableau simplex with Bland's anti-cycling rule.
    LpResult solve_lp(LinearProgram const& lp, double tolerance = 1e-9);
}
