#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <memory>

namespace bois {

enum class KernelKind { Matern52, RBF };

struct Hyperparams {
    double signal_variance = 1.0;  // sigma^2
    double lengthscale = 1.0;      // isotropic ell
    double noise_variance = 0.0;   // sigma_n^2 (exclusive of jitter)
};

/// Log-space box for the hyperparameter fit. The defaults bracket the
/// standardised-y regime; the domain diameter is 2*pi*sqrt(r).
struct HyperBounds {
    double sigma2_lo = 1e-6, sigma2_hi = 1e3;
    double ell_lo = 1e-2, ell_hi = 1e2;
    double noise_lo = 1e-10, noise_hi = 1.0;
};

/// Training set with internal y standardisation (zero mean, unit variance;
/// scale fixed to 1 when y is constant). The squared-distance matrix is
/// computed once and shared by all kernel evaluations of a fit.
class GpDataset {
  public:
    GpDataset(Eigen::MatrixXd X, Eigen::VectorXd y);

    int size() const { return static_cast<int>(X_.rows()); }
    int dim() const { return static_cast<int>(X_.cols()); }
    const Eigen::MatrixXd& X() const { return X_; }
    const Eigen::VectorXd& y_raw() const { return y_raw_; }
    const Eigen::VectorXd& y_std() const { return y_std_; }
    double y_mean() const { return mean_; }
    double y_scale() const { return scale_; }
    const Eigen::MatrixXd& sq_dist() const { return sq_dist_; }

  private:
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_raw_, y_std_;
    double mean_ = 0.0, scale_ = 1.0;
    Eigen::MatrixXd sq_dist_;
};

/// kernel(x,x) = sigma^2; Matern52 and RBF radial profiles.
double kernel_value(KernelKind kind, const Hyperparams& hp, const Eigen::VectorXd& x1,
                    const Eigen::VectorXd& x2);

/// Negative log marginal likelihood of the standardised data,
/// 0.5 y^T K^-1 y + 0.5 log det K + (m/2) log 2pi with K = K_f + sigma_n^2 I
/// (+ escalating jitter on factorisation failure, 1e-10 .. 1e-6).
double nlml(const GpDataset& data, KernelKind kind, const Hyperparams& hp,
            double jitter_floor = 1e-10);

/// Analytic gradient of nlml w.r.t. (log sigma^2, log ell, log sigma_n^2).
Eigen::Vector3d nlml_gradient(const GpDataset& data, KernelKind kind, const Hyperparams& hp,
                              double jitter_floor = 1e-10);

struct GpFitConfig {
    int n_restarts = 5;
    int max_iters = 1000;
    bool optimize_noise = false;  // frozen at jitter floor when false
    std::uint64_t seed = 0;
    HyperBounds bounds;
    double jitter_floor = 1e-10;
    double pg_tol = 1e-4;
};

struct GpPosterior {
    double mean = 0.0;                // raw-y units
    double variance = 0.0;            // clamped at 0, raw-y^2 units
    double variance_pre_clamp = 0.0;  // before the clamp, for diagnostics
};

struct GpPosteriorGradient {
    GpPosterior value;
    Eigen::VectorXd dmean;  // d mean / dx
    Eigen::VectorXd dsd;    // d sqrt(variance) / dx (zero when sd ~ 0)
};

/// Surrogate posterior: kernel kind + hyperparameters + training set +
/// Cholesky factor. Immutable after construction; safe to share read-only.
class FittedGP {
  public:
    FittedGP(KernelKind kind, Hyperparams hp, std::shared_ptr<const GpDataset> data,
             double jitter_floor = 1e-10);

    GpPosterior posterior(const Eigen::VectorXd& x) const;
    GpPosteriorGradient posterior_with_gradient(const Eigen::VectorXd& x) const;

    KernelKind kind() const { return kind_; }
    const Hyperparams& hp() const { return hp_; }
    const GpDataset& data() const { return *data_; }
    double fit_nlml() const { return nlml_; }
    double jitter_used() const { return jitter_used_; }
    const Eigen::MatrixXd& chol() const { return L_; }

    /// Training point with the lowest raw y.
    Eigen::VectorXd best_training_point() const;

    /// Negative-variance clamp diagnostics accumulated over posterior calls.
    long clamp_count() const { return clamp_->count.load(std::memory_order_relaxed); }
    double clamp_max() const;

  private:
    struct ClampStats {
        std::atomic<long> count{0};
        std::atomic<std::uint64_t> max_bits{0};  // bit pattern of the magnitude
    };
    void record_clamp(double pre_clamp) const;

    KernelKind kind_;
    Hyperparams hp_;
    std::shared_ptr<const GpDataset> data_;
    Eigen::MatrixXd L_;       // lower Cholesky of K + sigma_n^2 I + jitter
    Eigen::VectorXd alpha_;   // (K + ...)^-1 y_std
    double nlml_ = 0.0;
    double jitter_used_ = 0.0;
    std::shared_ptr<ClampStats> clamp_ = std::make_shared<ClampStats>();
};

/// Five seeded bounded quasi-Newton descents of nlml in log space
/// (log-uniform starting points within bounds); returns the best restart.
FittedGP fit_gp(std::shared_ptr<const GpDataset> data, KernelKind kind,
                const GpFitConfig& config);

}  // namespace bois
