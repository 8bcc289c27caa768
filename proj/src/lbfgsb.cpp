#include "bois/lbfgsb.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace bois {

namespace {

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

BoxMinimizeResult minimize_box(const BoxObjective& fg, Eigen::VectorXd x0,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               const BoxMinimizeOptions& opts) {
    const Eigen::Index dim = x0.size();
    if (lo.size() != dim || hi.size() != dim) {
        throw std::invalid_argument("minimize_box: bound dimensions do not match x0");
    }

    BoxMinimizeResult res;
    Eigen::VectorXd x = clamp_box(std::move(x0), lo, hi);
    Eigen::VectorXd g(dim);
    double f = fg(x, &g);
    ++res.n_evals;

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    double gamma = 1.0;
    int skipped_pairs = 0;
    const double armijo = 1e-4;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        res.iterations = iter;
        const double pg = (x - clamp_box(x - g, lo, hi)).lpNorm<Eigen::Infinity>();
        if (pg < opts.pg_tol) {
            res.converged = true;
            break;
        }

        // Two-loop recursion for d = -H g.
        Eigen::VectorXd d = -g;
        {
            const int m = static_cast<int>(s_hist.size());
            std::vector<double> alpha(m);
            for (int i = m - 1; i >= 0; --i) {
                alpha[i] = rho_hist[i] * s_hist[i].dot(d);
                d -= alpha[i] * y_hist[i];
            }
            d *= gamma;
            for (int i = 0; i < m; ++i) {
                const double beta = rho_hist[i] * y_hist[i].dot(d);
                d += (alpha[i] - beta) * s_hist[i];
            }
        }
        if (!d.allFinite() || g.dot(d) >= 0) {
            d = -g;
        }

        // Backtracking Armijo search; the unit step evaluates the gradient
        // alongside f since it is usually accepted as-is.
        double step = 1.0;
        double f_new = f;
        Eigen::VectorXd x_new;
        Eigen::VectorXd g_new(dim);
        bool accepted = false;
        bool have_grad = false;
        bool backtracked = false;
        while (step >= opts.min_step) {
            x_new = clamp_box(x + step * d, lo, hi);
            Eigen::VectorXd dx = x_new - x;
            if (dx.lpNorm<Eigen::Infinity>() == 0.0) break;  // no feasible movement
            const bool first_trial = !backtracked;
            have_grad = first_trial;
            f_new = fg(x_new, first_trial ? &g_new : nullptr);
            ++res.n_evals;
            if (std::isfinite(f_new) && f_new <= f + armijo * g.dot(dx)) {
                accepted = true;
                break;
            }
            backtracked = true;
            step *= 0.5;
        }
        if (!accepted) break;  // stalled; x is the best feasible point seen

        // Expansion: when the unit step went through untouched and the drop
        // nearly matches the linear prediction, the model scale is too
        // small (stale curvature); grow while f keeps dropping.
        if (!backtracked && f_new <= f + 0.9 * g.dot(x_new - x)) {
            double t = 2.0;
            for (int grow = 0; grow < 12; ++grow, t *= 2.0) {
                const Eigen::VectorXd x_try = clamp_box(x + t * d, lo, hi);
                if ((x_try - x_new).lpNorm<Eigen::Infinity>() == 0.0) break;
                const double f_try = fg(x_try, nullptr);
                ++res.n_evals;
                if (!std::isfinite(f_try) || f_try >= f_new) break;
                x_new = x_try;
                f_new = f_try;
                have_grad = false;
            }
        }

        if (!have_grad) {
            fg(x_new, &g_new);
            ++res.n_evals;
        }

        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            skipped_pairs = 0;
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
            gamma = sy / y_hist.back().squaredNorm();
            if (static_cast<int>(s_hist.size()) > opts.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        } else if (++skipped_pairs >= 2) {
            // repeated negative curvature along projected steps: the stored
            // model is misleading, restart it
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            const double gn = g_new.norm();
            gamma = gn > 0 ? std::min(1.0, s.norm() / gn) : 1.0;
            skipped_pairs = 0;
        }

        const double decrease = f - f_new;
        x = std::move(x_new);
        g = std::move(g_new);
        f = f_new;
        if (decrease <= opts.f_tol * (std::abs(f) + 1.0)) break;
    }

    res.x = std::move(x);
    res.f = f;
    return res;
}

}  // namespace bois
