#include "bois/orchestrator.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bois/rng.hpp"

namespace bois {

std::string scheme_name(const RunConfig& cfg) {
    switch (cfg.partners) {
        case PartnerRule::NoSharing: return "none";
        case PartnerRule::NearestNeighbor:
            return cfg.timing == Timing::Immediate ? "immediate-nn" : "nn";
        case PartnerRule::AllToAll:
            return cfg.timing == Timing::Immediate ? "immediate-all" : "all";
    }
    return "?";
}

std::string kernel_name(KernelKind k) {
    return k == KernelKind::Matern52 ? "matern52" : "rbf";
}

std::vector<Eigen::VectorXd> generate_initial_points(int r, int k, std::uint64_t seed) {
    auto rng = make_stream(seed, "init-points");
    std::vector<Eigen::VectorXd> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd theta(r);
        for (int j = 0; j < r; ++j) theta[j] = uniform_in(rng, 0.0, 2.0 * std::numbers::pi);
        out.push_back(std::move(theta));
    }
    return out;
}

std::string x_init_hash(const std::vector<Eigen::VectorXd>& points) {
    std::uint64_t h = 1469598103934665603ull;
    auto eat = [&](double v) {
        unsigned char buf[sizeof v];
        std::memcpy(buf, &v, sizeof v);
        for (unsigned char b : buf) {
            h ^= b;
            h *= 1099511628211ull;
        }
    };
    for (const auto& p : points)
        for (Eigen::Index j = 0; j < p.size(); ++j) eat(p[j]);
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::set<int> partners(const ProblemFamily& family, int d, PartnerRule rule) {
    if (d < 0 || d >= family.size()) {
        throw std::invalid_argument("partners: unknown geometry index " + std::to_string(d));
    }
    std::set<int> out;
    if (rule == PartnerRule::NoSharing) return out;
    if (rule == PartnerRule::AllToAll) {
        for (int i = 0; i < family.size(); ++i)
            if (i != d) out.insert(i);
        return out;
    }
    // Nearest neighbours: multi-index differs by +-1 in exactly one axis.
    const auto& me = family.grid_index(d);
    for (int i = 0; i < family.size(); ++i) {
        if (i == d) continue;
        const auto& other = family.grid_index(i);
        int diff_axes = 0;
        bool adjacent = true;
        for (std::size_t a = 0; a < me.size(); ++a) {
            const int delta = std::abs(me[a] - other[a]);
            if (delta == 0) continue;
            ++diff_axes;
            if (delta != 1) adjacent = false;
        }
        if (diff_axes == 1 && adjacent) out.insert(i);
    }
    return out;
}

RunState::RunState(const ProblemFamily& family, const RunConfig& cfg)
    : family_(family), cfg_(cfg) {
    if (family_.size() == 0) throw std::invalid_argument("RunState: family is empty");
    if (cfg_.partners == PartnerRule::NoSharing) cfg_.timing = Timing::Deferred;

    const int count = family_.size();
    references_.reserve(count);
    required_.reserve(count);
    for (int d = 0; d < count; ++d) {
        const double ref = exact_ground_energy(family_.geometries()[d]);
        if (ref == 0.0) {
            throw std::invalid_argument("reference energy of geometry '" +
                                        family_.geometries()[d].geometry_id() +
                                        "' is zero; relative convergence undefined");
        }
        references_.push_back(ref);
        required_.push_back(required_paulis(family_.geometries()[d]));
    }
    union_required_ = union_required(family_);

    partners_.resize(count);
    eval_sets_.resize(count);
    for (int d = 0; d < count; ++d) {
        partners_[d] = partners(family_, d, cfg_.partners);
        eval_sets_[d] = required_[d];
        for (int p : partners_[d]) {
            eval_sets_[d].insert(required_[p].begin(), required_[p].end());
        }
    }
    info_.resize(count);
}

int RunState::register_point(int origin_geometry, int iteration, Eigen::VectorXd theta) {
    points_.push_back({std::move(theta), origin_geometry, iteration, {}});
    return static_cast<int>(points_.size()) - 1;
}

const Eigen::VectorXd& RunState::point_theta(int point_id) const {
    return points_.at(point_id).theta;
}

ShotConfig RunState::shot_config_for_iteration(int n) const {
    if (!cfg_.shot_mode) return ShotConfig{std::nullopt, cfg_.depolarizing_p};
    const bool final_phase = n >= cfg_.n_max - cfg_.shots.final_window;
    return ShotConfig{final_phase ? cfg_.shots.final_shots : cfg_.shots.iter_shots,
                      cfg_.depolarizing_p};
}

void RunState::charge(long pauli_evals, long shots) {
    ledger_.total_pauli_evals += pauli_evals;
    ledger_.total_shots += shots;
    if (current_iteration_ < 0) {
        ledger_.init_pauli_evals += pauli_evals;
    } else {
        ledger_.per_iteration_pauli_evals.at(current_iteration_) += pauli_evals;
    }
}

void RunState::compute_missing(EvalPoint& pt, const std::set<std::string>& words,
                               const ShotConfig& shot_cfg, std::uint64_t rng_a,
                               std::uint64_t rng_b) {
    std::vector<const std::string*> missing;
    for (const auto& w : words) {
        if (!pt.values.contains(w)) missing.push_back(&w);
    }
    if (missing.empty()) return;

    const StateVector state = prepare_state(family_.ansatz(), std::span<const double>(
                                                pt.theta.data(), pt.theta.size()));
    auto rng = make_stream(cfg_.seed, "pauli-shots", rng_a, rng_b);
    long shots_used = 0;
    for (const std::string* w : missing) {
        const PauliString word{*w};
        const double value = sampled_expectation(state, word, shot_cfg, rng);
        pt.values.emplace(*w, value);
        if (!word.is_identity() && shot_cfg.shots.has_value()) shots_used += *shot_cfg.shots;
    }
    charge(static_cast<long>(missing.size()), shots_used);
}

double RunState::assemble_energy(int d, const EvalPoint& pt) const {
    return energy_from_expectations(family_.geometries()[d], pt.values);
}

double RunState::evaluate_objective(int d, int point_id, const std::set<std::string>& pauli_set,
                                    const ShotConfig& shot_cfg) {
    EvalPoint& pt = points_.at(point_id);
    compute_missing(pt, pauli_set, shot_cfg, static_cast<std::uint64_t>(point_id),
                    static_cast<std::uint64_t>(d));
    return assemble_energy(d, pt);
}

double RunState::share_to(int d_to, int point_id, const ShotConfig& shot_cfg) {
    return evaluate_objective(d_to, point_id, required_.at(d_to), shot_cfg);
}

void RunState::append_info(int d, const Eigen::VectorXd& theta, double energy) {
    InfoSet& set = info_.at(d);
    set.samples.push_back({theta, energy});
    if (energy < set.best) {
        set.best = energy;
        set.best_theta = theta;
    }
    TraceRow row;
    row.geometry = d;
    row.eval_index = static_cast<long>(set.samples.size());
    row.best_seen = set.best;
    row.rel_deviation = std::abs(set.best - references_[d]) / std::abs(references_[d]);
    traces_.push_back(row);
}

void RunState::update_convergence(int completed_iterations) {
    bool all = true;
    for (int d = 0; d < family_.size(); ++d) {
        InfoSet& set = info_[d];
        if (!set.convergence_iteration.has_value()) {
            const double rel = std::abs(set.best - references_[d]) / std::abs(references_[d]);
            if (rel < cfg_.epsilon) set.convergence_iteration = completed_iterations;
        }
        all = all && set.convergence_iteration.has_value();
    }
    if (all && !iteration_of_convergence_.has_value()) {
        iteration_of_convergence_ = completed_iterations;
    }
}

bool RunState::all_converged() const {
    return iteration_of_convergence_.has_value();
}

void RunState::initialize(const std::vector<Eigen::VectorXd>& x_init) {
    if (x_init.empty()) throw std::invalid_argument("initialize: no initial points");
    for (const auto& theta : x_init) {
        if (theta.size() != family_.ansatz().n_params()) {
            throw std::invalid_argument("initialize: point dimension does not match ansatz");
        }
    }
    current_iteration_ = -1;
    const ShotConfig init_cfg = cfg_.shot_mode
                                    ? ShotConfig{cfg_.shots.init_shots, cfg_.depolarizing_p}
                                    : ShotConfig{std::nullopt, cfg_.depolarizing_p};

    if (cfg_.partners == PartnerRule::NoSharing) {
        // Each geometry evaluates only its own words; no cross-geometry reuse.
        for (int d = 0; d < family_.size(); ++d) {
            for (std::size_t i = 0; i < x_init.size(); ++i) {
                const int pid = register_point(d, -1, x_init[i]);
                const double e = evaluate_objective(d, pid, required_[d], init_cfg);
                append_info(d, x_init[i], e);
            }
        }
        return;
    }

    // With sharing, the union Pauli set is evaluated once per initial point
    // and every geometry assembles its energies from the cache.
    std::vector<int> pids;
    pids.reserve(x_init.size());
    for (const auto& theta : x_init) {
        const int pid = register_point(-1, -1, theta);
        EvalPoint& pt = points_[pid];
        compute_missing(pt, union_required_, init_cfg, static_cast<std::uint64_t>(pid),
                        std::uint64_t(-1));
        pids.push_back(pid);
    }
    for (int d = 0; d < family_.size(); ++d) {
        for (std::size_t i = 0; i < x_init.size(); ++i) {
            const double e = assemble_energy(d, points_[pids[i]]);
            append_info(d, x_init[i], e);
        }
    }
}

Eigen::VectorXd RunState::select_next(int d, int n, std::size_t info_prefix) {
    const int r = family_.ansatz().n_params();
    if (cfg_.selector == RunConfig::Selector::Random) {
        auto rng = make_stream(cfg_.seed, "stub-select", d, n);
        Eigen::VectorXd theta(r);
        for (int j = 0; j < r; ++j) theta[j] = uniform_in(rng, 0.0, 2.0 * std::numbers::pi);
        return theta;
    }

    const InfoSet& set = info_.at(d);
    if (info_prefix < 1 || info_prefix > set.samples.size()) {
        throw std::logic_error("select_next: bad snapshot size");
    }
    Eigen::MatrixXd X(info_prefix, r);
    Eigen::VectorXd y(info_prefix);
    for (std::size_t i = 0; i < info_prefix; ++i) {
        X.row(i) = set.samples[i].theta.transpose();
        y[i] = set.samples[i].energy;
    }
    GpFitConfig fc;
    fc.n_restarts = cfg_.gp_restarts;
    fc.max_iters = cfg_.gp_max_iters;
    fc.optimize_noise = cfg_.shot_mode;
    fc.seed = substream_seed(cfg_.seed, "gp-fit", d, n);
    const FittedGP gp = fit_gp(std::make_shared<GpDataset>(std::move(X), std::move(y)),
                               cfg_.kernel, fc);

    auto rng = make_stream(cfg_.seed, "acq", d, n);
    const Eigen::VectorXd theta = next_point(gp, kappa(cfg_.acq, n), cfg_.acq, rng);

    clamp_count_ += gp.clamp_count();
    clamp_max_ = std::max(clamp_max_, gp.clamp_max());
    return theta;
}

void RunState::run_iteration(int n) {
    if (cfg_.timing == Timing::Immediate) {
        run_iteration_immediate(n);
    } else {
        run_iteration_deferred(n);
    }
}

void RunState::run_iteration_deferred(int n, const std::vector<int>* order) {
    if (static_cast<int>(ledger_.per_iteration_pauli_evals.size()) != n) {
        throw std::logic_error("run_iteration_deferred: iterations must be executed in order");
    }
    ledger_.per_iteration_pauli_evals.push_back(0);
    current_iteration_ = n;
    const ShotConfig shot_cfg = shot_config_for_iteration(n);
    const int count = family_.size();

    // Phase-1 models see the iteration-start snapshot of I^d only.
    std::vector<std::size_t> snapshot(count);
    for (int d = 0; d < count; ++d) snapshot[d] = info_[d].samples.size();

    std::vector<int> default_order(count);
    for (int d = 0; d < count; ++d) default_order[d] = d;
    const std::vector<int>& processing = order ? *order : default_order;

    std::vector<int> pids(count, -1);
    for (int d : processing) {
        const Eigen::VectorXd theta = select_next(d, n, snapshot[d]);
        const int pid = register_point(d, n, theta);
        const double e = evaluate_objective(d, pid, eval_sets_[d], shot_cfg);
        append_info(d, theta, e);
        pids[d] = pid;
    }

    for (int d = 0; d < count; ++d) {
        for (int partner : partners_[d]) {
            const double e = share_to(partner, pids[d], shot_cfg);
            append_info(partner, points_[pids[d]].theta, e);
        }
    }
}

void RunState::run_iteration_immediate(int n) {
    if (static_cast<int>(ledger_.per_iteration_pauli_evals.size()) != n) {
        throw std::logic_error("run_iteration_immediate: iterations must be executed in order");
    }
    ledger_.per_iteration_pauli_evals.push_back(0);
    current_iteration_ = n;
    const ShotConfig shot_cfg = shot_config_for_iteration(n);

    for (int d = 0; d < family_.size(); ++d) {
        const Eigen::VectorXd theta = select_next(d, n, info_[d].samples.size());
        const int pid = register_point(d, n, theta);
        const double e = evaluate_objective(d, pid, eval_sets_[d], shot_cfg);
        append_info(d, theta, e);
        for (int partner : partners_[d]) {
            const double shared = share_to(partner, pid, shot_cfg);
            append_info(partner, theta, shared);
        }
    }
}

RunResult RunState::finalize(int iterations_run) const {
    RunResult res;
    res.iterations_run = iterations_run;
    res.iteration_of_convergence = iteration_of_convergence_;
    res.ledger = ledger_;
    res.traces = traces_;
    res.gp_variance_clamp_count = clamp_count_;
    res.gp_variance_clamp_max = clamp_max_;
    for (int d = 0; d < family_.size(); ++d) {
        GeometryResult g;
        g.id = family_.geometries()[d].geometry_id();
        g.reference = references_[d];
        g.best_energy = info_[d].best;
        g.best_theta = info_[d].best_theta;
        g.convergence_iteration = info_[d].convergence_iteration;
        g.n_evals = static_cast<long>(info_[d].samples.size());
        res.geometries.push_back(std::move(g));
    }
    return res;
}

RunResult run(const ProblemFamily& family, const RunConfig& cfg) {
    RunConfig effective = cfg;
    if (effective.partners == PartnerRule::NoSharing) effective.timing = Timing::Deferred;

    RunState state(family, effective);
    const auto x_init =
        generate_initial_points(family.ansatz().n_params(), effective.n_init, effective.seed);
    state.initialize(x_init);
    state.update_convergence(0);

    int n = 0;
    while (n < effective.n_max && !state.all_converged()) {
        state.run_iteration(n);
        state.update_convergence(n + 1);
        ++n;
    }

    RunResult res = state.finalize(n);
    res.seed = effective.seed;
    res.scheme = scheme_name(effective);
    res.kernel = kernel_name(effective.kernel);
    res.mode = effective.shot_mode ? "shots" : "exact";
    res.family_path = family.source_path();
    res.family_hash = family.content_hash();
    res.x_init_hash = x_init_hash(x_init);
    res.config = effective;
    return res;
}

}  // namespace bois
