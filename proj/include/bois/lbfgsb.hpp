#pragma once

#include <Eigen/Dense>
#include <functional>

namespace bois {

/// Objective callback: returns f(x) and, when `grad` is non-null, writes the
/// gradient into it.
using BoxObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BoxMinimizeOptions {
    int max_iters = 100;
    int history = 8;          // L-BFGS memory
    double pg_tol = 1e-5;     // projected-gradient infinity norm
    double f_tol = 1e-12;     // relative decrease stop
    double min_step = 1e-14;  // line-search floor
};

struct BoxMinimizeResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int n_evals = 0;
    bool converged = false;  // projected gradient below tolerance
};

/// Minimises f over the box [lo, hi] with a projected L-BFGS iteration and a
/// backtracking Armijo line search. Iterates stay feasible and f is
/// non-increasing from x0 to the result.
BoxMinimizeResult minimize_box(const BoxObjective& fg, Eigen::VectorXd x0,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               const BoxMinimizeOptions& opts = {});

}  // namespace bois
