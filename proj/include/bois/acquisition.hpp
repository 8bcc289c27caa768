#pragma once

#include <Eigen/Dense>
#include <random>

#include "bois/gp.hpp"

namespace bois {

/// Acquisition settings. n_max is the denominator of the linear kappa decay
/// (the schedule experiment varies it independently of the iteration cap).
struct AcqConfig {
    double kappa0 = 1.0;
    int n_max = 100;
    int n_starts = 10;
    int max_iters = 100;
};

/// kappa_n = max(1e-6, kappa0 * (1 - n / n_max)).
double kappa(const AcqConfig& cfg, int n);

/// Lower confidence bound mu(x) - kappa * sigma(x) in raw-y units.
double lcb(const FittedGP& g, const Eigen::VectorXd& x, double kappa);

/// Minimises the LCB over [0, 2pi]^r with bounded local descents from
/// n_starts seeded uniform starts plus the best-seen training point. Ties
/// between starts break towards the lowest start index.
Eigen::VectorXd next_point(const FittedGP& g, double kappa, const AcqConfig& cfg,
                           std::mt19937_64& rng);

}  // namespace bois
