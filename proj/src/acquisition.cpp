#include "bois/acquisition.hpp"

#include <cmath>
#include <numbers>

#include "bois/lbfgsb.hpp"
#include "bois/rng.hpp"

namespace bois {

double kappa(const AcqConfig& cfg, int n) {
    return std::max(0.000001,
                    cfg.kappa0 * (1.0 - static_cast<double>(n) / static_cast<double>(cfg.n_max)));
}

double lcb(const FittedGP& g, const Eigen::VectorXd& x, double kappa) {
    const GpPosterior post = g.posterior(x);
    return post.mean - kappa * std::sqrt(post.variance);
}

Eigen::VectorXd next_point(const FittedGP& g, double kappa, const AcqConfig& cfg,
                           std::mt19937_64& rng) {
    const int r = g.data().dim();
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(r);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(r, 2.0 * std::numbers::pi);

    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        if (!grad) return lcb(g, x, kappa);
        const GpPosteriorGradient pg = g.posterior_with_gradient(x);
        *grad = pg.dmean - kappa * pg.dsd;
        return pg.value.mean - kappa * std::sqrt(pg.value.variance);
    };

    BoxMinimizeOptions opts;
    opts.max_iters = cfg.max_iters;
    opts.pg_tol = 1e-7;

    // Seeded uniform starts plus the incumbent training point.
    std::vector<Eigen::VectorXd> starts;
    starts.reserve(cfg.n_starts + 1);
    for (int k = 0; k < cfg.n_starts; ++k) {
        Eigen::VectorXd x(r);
        for (int j = 0; j < r; ++j) x[j] = uniform_in(rng, 0.0, 2.0 * std::numbers::pi);
        starts.push_back(std::move(x));
    }
    starts.push_back(g.best_training_point());

    Eigen::VectorXd best_x = starts.front();
    double best_f = std::numeric_limits<double>::infinity();
    for (const auto& x0 : starts) {
        BoxMinimizeResult res;
        try {
            res = minimize_box(objective, x0, lo, hi, opts);
        } catch (const std::exception&) {
            continue;  // degenerate surface from this start
        }
        if (std::isfinite(res.f) && res.f < best_f) {
            best_f = res.f;
            best_x = res.x;
        }
    }
    return best_x;
}

}  // namespace bois
