#include "bois/gp.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "bois/lbfgsb.hpp"
#include "bois/rng.hpp"

namespace bois {

namespace {

constexpr double kSqrt5 = 2.2360679774997896;
constexpr double kMaxJitter = 1e-6;

/// Radial profile c(r^2) with c(0) = 1.
double kernel_profile(KernelKind kind, double ell, double r2) {
    if (kind == KernelKind::RBF) {
        return std::exp(-0.5 * r2 / (ell * ell));
    }
    const double s = kSqrt5 * std::sqrt(r2) / ell;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

/// d c / d log(ell) as a function of r^2.
double kernel_profile_dlogell(KernelKind kind, double ell, double r2) {
    if (kind == KernelKind::RBF) {
        return kernel_profile(kind, ell, r2) * r2 / (ell * ell);
    }
    const double s = kSqrt5 * std::sqrt(r2) / ell;
    return s * s * (1.0 + s) / 3.0 * std::exp(-s);
}

Eigen::MatrixXd kernel_matrix(KernelKind kind, const Hyperparams& hp,
                              const Eigen::MatrixXd& sq_dist) {
    const Eigen::Index m = sq_dist.rows();
    Eigen::MatrixXd K(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        K(j, j) = hp.signal_variance;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double v = hp.signal_variance * kernel_profile(kind, hp.lengthscale, sq_dist(i, j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

struct CholResult {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

/// Factorises K_f + sigma_n^2 I + jitter I, escalating jitter up to 1e-6.
CholResult chol_with_jitter(const Eigen::MatrixXd& Kf, double noise_variance,
                            double jitter_floor) {
    CholResult out;
    double jitter = jitter_floor;
    while (true) {
        Eigen::MatrixXd K = Kf;
        K.diagonal().array() += noise_variance + jitter;
        out.llt.compute(K);
        if (out.llt.info() == Eigen::Success) {
            out.jitter = jitter;
            return out;
        }
        if (jitter >= kMaxJitter) {
            throw std::runtime_error("gp: Cholesky failed after jitter escalation to " +
                                     std::to_string(jitter));
        }
        jitter *= 10.0;
    }
}

double nlml_from_chol(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& y,
                      Eigen::VectorXd* alpha_out = nullptr) {
    Eigen::VectorXd alpha = llt.solve(y);
    const double quad = 0.5 * y.dot(alpha);
    const double logdet = llt.matrixLLT().diagonal().array().log().sum();
    if (alpha_out) *alpha_out = std::move(alpha);
    return quad + logdet +
           0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

}  // namespace

GpDataset::GpDataset(Eigen::MatrixXd X, Eigen::VectorXd y)
    : X_(std::move(X)), y_raw_(std::move(y)) {
    if (X_.rows() != y_raw_.size() || X_.rows() < 1) {
        throw std::invalid_argument("GpDataset: need |X| = |y| >= 1");
    }
    mean_ = y_raw_.mean();
    const double var = (y_raw_.array() - mean_).square().mean();
    scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
    y_std_ = (y_raw_.array() - mean_) / scale_;

    const Eigen::Index m = X_.rows();
    sq_dist_.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        sq_dist_(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double d2 = (X_.row(i) - X_.row(j)).squaredNorm();
            sq_dist_(i, j) = d2;
            sq_dist_(j, i) = d2;
        }
    }
}

double kernel_value(KernelKind kind, const Hyperparams& hp, const Eigen::VectorXd& x1,
                    const Eigen::VectorXd& x2) {
    return hp.signal_variance * kernel_profile(kind, hp.lengthscale, (x1 - x2).squaredNorm());
}

namespace {

double nlml_impl(const GpDataset& data, KernelKind kind, const Hyperparams& hp,
                 double jitter_floor, Eigen::Vector3d* grad) {
    const Eigen::Index m = data.size();
    const Eigen::MatrixXd Kf = kernel_matrix(kind, hp, data.sq_dist());
    const auto chol = chol_with_jitter(Kf, hp.noise_variance, jitter_floor);
    Eigen::VectorXd alpha;
    const double value = nlml_from_chol(chol.llt, data.y_std(), &alpha);
    if (!grad) return value;

    // dNLML/dphi = 0.5 tr((K^-1 - alpha alpha^T) dK/dphi). K^-1 = W^T W with
    // W = L^-1; tr(K^-1 K_f) reduces to m - (noise + jitter) tr(K^-1).
    const Eigen::MatrixXd& L = chol.llt.matrixLLT();
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(m, m);
    L.triangularView<Eigen::Lower>().solveInPlace(W);
    Eigen::MatrixXd Kinv(m, m);
    Kinv.setZero();
    Kinv.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
    const double tr_Kinv = Kinv.diagonal().sum();

    Eigen::MatrixXd dK_logell(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        dK_logell(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double v = hp.signal_variance *
                             kernel_profile_dlogell(kind, hp.lengthscale, data.sq_dist()(i, j));
            dK_logell(i, j) = v;
            dK_logell(j, i) = v;
        }
    }

    // only the lower triangles of Kinv are filled; exploit symmetry
    auto sym_dot = [&](const Eigen::MatrixXd& dK) {
        double off = 0.0, diag = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            diag += Kinv(j, j) * dK(j, j);
            for (Eigen::Index i = j + 1; i < m; ++i) off += Kinv(i, j) * dK(i, j);
        }
        return diag + 2.0 * off;
    };

    const double noise_total = hp.noise_variance + chol.jitter;
    const double tr_Kinv_Kf = static_cast<double>(m) - noise_total * tr_Kinv;
    (*grad)[0] = 0.5 * (tr_Kinv_Kf - alpha.dot(Kf * alpha));
    (*grad)[1] = 0.5 * (sym_dot(dK_logell) - alpha.dot(dK_logell * alpha));
    // dK/dlog sigma_n^2 = sigma_n^2 I
    (*grad)[2] = 0.5 * hp.noise_variance * (tr_Kinv - alpha.squaredNorm());
    return value;
}

}  // namespace

double nlml(const GpDataset& data, KernelKind kind, const Hyperparams& hp,
            double jitter_floor) {
    return nlml_impl(data, kind, hp, jitter_floor, nullptr);
}

Eigen::Vector3d nlml_gradient(const GpDataset& data, KernelKind kind, const Hyperparams& hp,
                              double jitter_floor) {
    Eigen::Vector3d grad;
    nlml_impl(data, kind, hp, jitter_floor, &grad);
    return grad;
}

FittedGP::FittedGP(KernelKind kind, Hyperparams hp, std::shared_ptr<const GpDataset> data,
                   double jitter_floor)
    : kind_(kind), hp_(hp), data_(std::move(data)) {
    const Eigen::MatrixXd Kf = kernel_matrix(kind_, hp_, data_->sq_dist());
    auto chol = chol_with_jitter(Kf, hp_.noise_variance, jitter_floor);
    jitter_used_ = chol.jitter;
    nlml_ = nlml_from_chol(chol.llt, data_->y_std(), &alpha_);
    L_ = chol.llt.matrixL();
}

double FittedGP::clamp_max() const {
    const std::uint64_t bits = clamp_->max_bits.load(std::memory_order_relaxed);
    double v;
    static_assert(sizeof v == sizeof bits);
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

void FittedGP::record_clamp(double pre_clamp) const {
    if (pre_clamp >= 0.0) return;
    clamp_->count.fetch_add(1, std::memory_order_relaxed);
    const double magnitude = -pre_clamp;
    std::uint64_t bits;
    std::memcpy(&bits, &magnitude, sizeof bits);
    // non-negative doubles order like their bit patterns
    std::uint64_t prev = clamp_->max_bits.load(std::memory_order_relaxed);
    while (bits > prev &&
           !clamp_->max_bits.compare_exchange_weak(prev, bits, std::memory_order_relaxed)) {
    }
}

GpPosterior FittedGP::posterior(const Eigen::VectorXd& x) const {
    if (x.size() != data_->dim()) {
        throw std::invalid_argument("posterior: point dimension " + std::to_string(x.size()) +
                                    " != training dimension " + std::to_string(data_->dim()));
    }
    const Eigen::Index m = data_->size();
    Eigen::VectorXd kstar(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        kstar[i] = hp_.signal_variance *
                   kernel_profile(kind_, hp_.lengthscale, (data_->X().row(i).transpose() - x).squaredNorm());
    }
    const double mean_std = kstar.dot(alpha_);
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(kstar);
    const double var_std = hp_.signal_variance - v.squaredNorm();

    GpPosterior post;
    const double s2 = data_->y_scale() * data_->y_scale();
    post.mean = mean_std * data_->y_scale() + data_->y_mean();
    post.variance_pre_clamp = var_std * s2;
    post.variance = std::max(0.0, post.variance_pre_clamp);
    record_clamp(post.variance_pre_clamp);
    return post;
}

GpPosteriorGradient FittedGP::posterior_with_gradient(const Eigen::VectorXd& x) const {
    if (x.size() != data_->dim()) {
        throw std::invalid_argument("posterior_with_gradient: point dimension " +
                                    std::to_string(x.size()) + " != training dimension " +
                                    std::to_string(data_->dim()));
    }
    const Eigen::Index m = data_->size();
    const Eigen::Index r = data_->dim();
    Eigen::VectorXd kstar(m);
    Eigen::MatrixXd dkstar(m, r);  // row i: d k(x, x_i) / dx
    const double ell2 = hp_.lengthscale * hp_.lengthscale;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd diff = x - data_->X().row(i).transpose();
        const double r2 = diff.squaredNorm();
        if (kind_ == KernelKind::RBF) {
            const double k = hp_.signal_variance * std::exp(-0.5 * r2 / ell2);
            kstar[i] = k;
            dkstar.row(i) = (-k / ell2) * diff.transpose();
        } else {
            const double s = kSqrt5 * std::sqrt(r2) / hp_.lengthscale;
            const double es = std::exp(-s);
            kstar[i] = hp_.signal_variance * (1.0 + s + s * s / 3.0) * es;
            dkstar.row(i) =
                (-(5.0 * hp_.signal_variance / (3.0 * ell2)) * es * (1.0 + s)) * diff.transpose();
        }
    }

    const Eigen::VectorXd w = L_.triangularView<Eigen::Lower>().solve(kstar);
    const Eigen::VectorXd Kinv_kstar =
        L_.triangularView<Eigen::Lower>().transpose().solve(w);

    GpPosteriorGradient out;
    const double scale = data_->y_scale();
    const double s2 = scale * scale;
    out.value.mean = kstar.dot(alpha_) * scale + data_->y_mean();
    out.value.variance_pre_clamp = (hp_.signal_variance - w.squaredNorm()) * s2;
    out.value.variance = std::max(0.0, out.value.variance_pre_clamp);
    record_clamp(out.value.variance_pre_clamp);

    out.dmean = (dkstar.transpose() * alpha_) * scale;
    const double sd = std::sqrt(out.value.variance);
    if (sd > 1e-12) {
        const Eigen::VectorXd dvar_std = -2.0 * (dkstar.transpose() * Kinv_kstar);
        out.dsd = dvar_std * s2 / (2.0 * sd);
    } else {
        out.dsd = Eigen::VectorXd::Zero(r);
    }
    return out;
}

Eigen::VectorXd FittedGP::best_training_point() const {
    Eigen::Index best = 0;
    data_->y_raw().minCoeff(&best);
    return data_->X().row(best);
}

FittedGP fit_gp(std::shared_ptr<const GpDataset> data, KernelKind kind,
                const GpFitConfig& config) {
    const bool opt_noise = config.optimize_noise;
    const int n_dim = opt_noise ? 3 : 2;
    const HyperBounds& b = config.bounds;

    Eigen::VectorXd lo(n_dim), hi(n_dim);
    lo[0] = std::log(b.sigma2_lo);
    hi[0] = std::log(b.sigma2_hi);
    lo[1] = std::log(b.ell_lo);
    hi[1] = std::log(b.ell_hi);
    if (opt_noise) {
        lo[2] = std::log(b.noise_lo);
        hi[2] = std::log(b.noise_hi);
    }

    auto unpack = [&](const Eigen::VectorXd& logp) {
        Hyperparams hp;
        hp.signal_variance = std::exp(logp[0]);
        hp.lengthscale = std::exp(logp[1]);
        hp.noise_variance = opt_noise ? std::exp(logp[2]) : config.jitter_floor;
        return hp;
    };

    auto objective = [&](const Eigen::VectorXd& logp, Eigen::VectorXd* grad) {
        const Hyperparams hp = unpack(logp);
        if (!grad) return nlml(*data, kind, hp, config.jitter_floor);
        Eigen::Vector3d g3;
        const double value = nlml_impl(*data, kind, hp, config.jitter_floor, &g3);
        grad->resize(n_dim);
        (*grad)[0] = g3[0];
        (*grad)[1] = g3[1];
        if (opt_noise) (*grad)[2] = g3[2];
        return value;
    };

    BoxMinimizeOptions opts;
    opts.max_iters = config.max_iters;
    // nlml is extensive in m; keep the absolute first-order tolerance from
    // becoming needlessly tight for large training sets
    opts.pg_tol = std::min(8e-4, config.pg_tol * std::max(1.0, data->size() / 200.0));

    auto rng = std::mt19937_64(config.seed);
    bool have_best = false;
    double best_f = 0.0;
    Eigen::VectorXd best_x;
    for (int restart = 0; restart < config.n_restarts; ++restart) {
        Eigen::VectorXd x0(n_dim);
        for (int k = 0; k < n_dim; ++k) x0[k] = uniform_in(rng, lo[k], hi[k]);
        try {
            const BoxMinimizeResult res = minimize_box(objective, x0, lo, hi, opts);
            if (std::isfinite(res.f) && (!have_best || res.f < best_f)) {
                have_best = true;
                best_f = res.f;
                best_x = res.x;
            }
        } catch (const std::runtime_error&) {
            // factorisation failure for this restart; others may succeed
        }
    }
    if (!have_best) {
        throw std::runtime_error("fit_gp: no restart produced a finite marginal likelihood");
    }
    return FittedGP(kind, unpack(best_x), std::move(data), config.jitter_floor);
}

}  // namespace bois
