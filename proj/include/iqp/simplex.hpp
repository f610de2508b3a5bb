#pragma once

// Dense two-phase tableau simplex with Bland's anti-cycling rule.
//
// Solves   min/max  c'x   s.t.  a_i'x (>=|<=|=) b_i,  x >= 0.
//
// Every row gets an artificial column, so the phase-1 multipliers can be read
// off the artificial reduced costs. When phase 1 ends with positive
// infeasibility those multipliers form a Farkas certificate y with
//   y_i >= 0 on >= rows, y_i <= 0 on <= rows, free on = rows,
//   sum_i y_i a_ij <= 0 for every column j,   and   y'b > 0.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "iqp/error.hpp"

namespace iqp::lp {

enum class Relation { GreaterEq, LessEq, Equal };
enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };

struct Row {
    std::vector<double> coeffs;
    Relation relation = Relation::GreaterEq;
    double rhs = 0.0;
};

struct Problem {
    std::size_t num_vars = 0;
    std::vector<Row> rows;
};

struct Options {
    double pivot_tolerance = 1e-10;
    double feasibility_tolerance = 1e-9;
    double cost_tolerance = 1e-11;
    std::size_t max_pivots = 200000;
};

struct Result {
    Status status = Status::Infeasible;
    std::vector<double> x;       // primal point (Optimal only)
    double objective = 0.0;      // c'x at x (Optimal only)
    double infeasibility = 0.0;  // phase-1 optimum: sum of artificials
    std::vector<double> farkas;  // row multipliers (Infeasible only)
    std::size_t pivots = 0;
};

namespace detail {

class Tableau {
public:
    Tableau(const Problem& p, const Options& opt) : opt_(opt), n_(p.num_vars), r_(p.rows.size()) {
        for (const Row& row : p.rows) {
            if (row.coeffs.size() != n_)
                throw InvalidArgument("credal-lp", "LP row has " + std::to_string(row.coeffs.size()) +
                                                       " coefficients, expected " + std::to_string(n_));
            if (row.relation != Relation::Equal) ++num_slacks_;
        }
        art0_ = n_ + num_slacks_;
        cols_ = art0_ + r_;
        t_.assign(r_, std::vector<double>(cols_ + 1, 0.0));
        sign_.assign(r_, 1.0);
        basis_.assign(r_, 0);

        std::size_t slack = n_;
        for (std::size_t i = 0; i < r_; ++i) {
            const Row& row = p.rows[i];
            sign_[i] = row.rhs < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) t_[i][j] = sign_[i] * row.coeffs[j];
            if (row.relation == Relation::GreaterEq)
                t_[i][slack++] = -sign_[i];
            else if (row.relation == Relation::LessEq)
                t_[i][slack++] = sign_[i];
            t_[i][art0_ + i] = 1.0;
            t_[i][cols_] = sign_[i] * row.rhs;
            basis_[i] = art0_ + i;
        }
        barred_.assign(cols_, false);
    }

    // Phase 1. Returns the minimum total infeasibility.
    double phase_one() {
        std::vector<double> cost(cols_, 0.0);
        for (std::size_t i = 0; i < r_; ++i) cost[art0_ + i] = 1.0;
        price(cost);
        run();
        return -d_[cols_];
    }

    // y_i = sign_i * (1 - reduced cost of artificial i).
    std::vector<double> farkas() const {
        std::vector<double> y(r_);
        for (std::size_t i = 0; i < r_; ++i) y[i] = sign_[i] * (1.0 - d_[art0_ + i]);
        return y;
    }

    // Pivots basic artificials out where a structural or slack column allows,
    // then bars every artificial from re-entering.
    void drop_artificials() {
        for (std::size_t r = 0; r < r_; ++r) {
            if (basis_[r] < art0_) continue;
            std::size_t best = cols_;
            double best_abs = opt_.pivot_tolerance;
            for (std::size_t j = 0; j < art0_; ++j) {
                if (std::abs(t_[r][j]) > best_abs) {
                    best_abs = std::abs(t_[r][j]);
                    best = j;
                }
            }
            if (best != cols_) pivot(r, best);
        }
        for (std::size_t j = art0_; j < cols_; ++j) barred_[j] = true;
    }

    // Returns false when the objective is unbounded below.
    bool phase_two(std::span<const double> structural_cost) {
        std::vector<double> cost(cols_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) cost[j] = structural_cost[j];
        price(cost);
        return run();
    }

    std::vector<double> primal() const {
        std::vector<double> x(n_, 0.0);
        for (std::size_t r = 0; r < r_; ++r) {
            if (basis_[r] < n_) {
                double v = t_[r][cols_];
                if (v < 0.0 && v > -1e-12) v = 0.0;
                x[basis_[r]] = v;
            }
        }
        return x;
    }

    std::size_t pivots() const { return pivots_; }

private:
    void price(const std::vector<double>& cost) {
        d_.assign(cols_ + 1, 0.0);
        for (std::size_t j = 0; j < cols_; ++j) d_[j] = cost[j];
        for (std::size_t r = 0; r < r_; ++r) {
            const double cb = cost[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) d_[j] -= cb * t_[r][j];
        }
    }

    bool run() {
        for (;;) {
            // Bland: lowest-index improving column enters.
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!barred_[j] && d_[j] < -opt_.cost_tolerance) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) return true;

            // Minimum ratio; ties go to the lowest-index basic variable.
            std::size_t leave = r_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < r_; ++r) {
                const double a = t_[r][enter];
                if (a <= opt_.pivot_tolerance) continue;
                const double ratio = std::max(t_[r][cols_], 0.0) / a;
                if (leave == r_ || ratio < best_ratio - 1e-12) {
                    best_ratio = ratio;
                    leave = r;
                } else if (ratio <= best_ratio + 1e-12 && basis_[r] < basis_[leave]) {
                    best_ratio = std::min(best_ratio, ratio);
                    leave = r;
                }
            }
            if (leave == r_) return false;
            pivot(leave, enter);
            if (pivots_ > opt_.max_pivots)
                throw NumericalError("credal-lp", "simplex pivot limit (" + std::to_string(opt_.max_pivots) +
                                                      ") exceeded");
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        ++pivots_;
        std::vector<double>& prow = t_[r];
        const double inv = 1.0 / prow[c];
        for (double& v : prow) v *= inv;
        prow[c] = 1.0;
        for (std::size_t i = 0; i < r_; ++i) {
            if (i == r) continue;
            const double f = t_[i][c];
            if (f == 0.0) continue;
            std::vector<double>& row = t_[i];
            for (std::size_t j = 0; j <= cols_; ++j) row[j] -= f * prow[j];
            row[c] = 0.0;
        }
        const double f = d_[c];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= cols_; ++j) d_[j] -= f * prow[j];
            d_[c] = 0.0;
        }
        basis_[r] = c;
    }

    Options opt_;
    std::size_t n_;
    std::size_t r_;
    std::size_t num_slacks_ = 0;
    std::size_t art0_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::vector<double>> t_;
    std::vector<double> d_;
    std::vector<double> sign_;
    std::vector<std::size_t> basis_;
    std::vector<bool> barred_;
    std::size_t pivots_ = 0;
};

}  // namespace detail

inline Result solve(const Problem& problem, std::span<const double> objective, Sense sense,
                    const Options& options = {}) {
    if (objective.size() != problem.num_vars)
        throw InvalidArgument("credal-lp", "objective has " + std::to_string(objective.size()) +
                                               " coefficients, expected " + std::to_string(problem.num_vars));
    detail::Tableau tab(problem, options);
    Result res;
    res.infeasibility = tab.phase_one();
    if (res.infeasibility > options.feasibility_tolerance) {
        res.status = Status::Infeasible;
        res.farkas = tab.farkas();
        res.pivots = tab.pivots();
        return res;
    }
    tab.drop_artificials();
    std::vector<double> cost(objective.begin(), objective.end());
    if (sense == Sense::Maximize)
        for (double& c : cost) c = -c;
    const bool bounded = tab.phase_two(cost);
    res.pivots = tab.pivots();
    if (!bounded) {
        res.status = Status::Unbounded;
        return res;
    }
    res.status = Status::Optimal;
    res.x = tab.primal();
    for (std::size_t j = 0; j < problem.num_vars; ++j) res.objective += objective[j] * res.x[j];
    return res;
}

// Phase 1 only, with a zero objective.
inline Result find_feasible(const Problem& problem, const Options& options = {}) {
    const std::vector<double> zero(problem.num_vars, 0.0);
    return solve(problem, zero, Sense::Minimize, options);
}

}  // namespace iqp::lp
