#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bois/acquisition.hpp"
#include "bois/family.hpp"
#include "bois/gp.hpp"
#include "bois/simulator.hpp"

namespace bois {

enum class Timing { Deferred, Immediate };
enum class PartnerRule { NoSharing, NearestNeighbor, AllToAll };

/// Shot counts per phase; the final window is counted back from the
/// iteration cap, not predicted from convergence.
struct ShotSchedule {
    long init_shots = 8192;
    long iter_shots = 1000;
    long final_shots = 8192;
    int final_window = 5;
};

struct RunConfig {
    Timing timing = Timing::Deferred;
    PartnerRule partners = PartnerRule::NoSharing;
    int n_max = 100;  // iteration cap
    int n_init = 30;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
    KernelKind kernel = KernelKind::Matern52;
    AcqConfig acq;  // acq.n_max is the kappa-schedule denominator
    bool shot_mode = false;
    ShotSchedule shots;
    double depolarizing_p = 0.0;
    int gp_restarts = 5;
    int gp_max_iters = 1000;

    /// Random selection replaces the GP/acquisition step with uniform draws;
    /// the evaluation, cache and ledger machinery is unchanged. Used for
    /// fast demand accounting.
    enum class Selector { Gp, Random };
    Selector selector = Selector::Gp;
};

std::string scheme_name(const RunConfig& cfg);
std::string kernel_name(KernelKind k);

/// Quantum-demand counters. One Pauli evaluation is one expectation estimate
/// of one word at one point; identity words count as evaluations but consume
/// no shots. Cache hits increment nothing.
struct QCLedger {
    long init_pauli_evals = 0;
    std::vector<long> per_iteration_pauli_evals;
    long total_pauli_evals = 0;
    long total_shots = 0;
};

/// Per-geometry information set I^d with the best-seen value F^d.
struct InfoSample {
    Eigen::VectorXd theta;
    double energy = 0.0;
};

struct InfoSet {
    std::vector<InfoSample> samples;
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    std::optional<int> convergence_iteration;  // 0 = after initialisation
};

struct TraceRow {
    int geometry = 0;
    long eval_index = 0;  // 1-based count of energies known to this geometry
    double best_seen = 0.0;
    double rel_deviation = 0.0;
};

struct GeometryResult {
    std::string id;
    double reference = 0.0;
    double best_energy = 0.0;
    Eigen::VectorXd best_theta;
    std::optional<int> convergence_iteration;
    long n_evals = 0;
};

struct RunResult {
    std::vector<GeometryResult> geometries;
    std::vector<TraceRow> traces;
    std::optional<int> iteration_of_convergence;
    int iterations_run = 0;
    QCLedger ledger;

    // metadata
    std::uint64_t seed = 0;
    std::string scheme;
    std::string kernel;
    std::string mode;  // "exact" | "shots"
    std::string family_path;
    std::string family_hash;
    std::string x_init_hash;
    RunConfig config;
    long gp_variance_clamp_count = 0;
    double gp_variance_clamp_max = 0.0;
};

/// k points uniform in [0, 2pi]^r drawn from the "init-points" stream of the
/// master seed; identical for every scheme sharing that seed.
std::vector<Eigen::VectorXd> generate_initial_points(int r, int k = 30,
                                                     std::uint64_t seed = 0);

std::string x_init_hash(const std::vector<Eigen::VectorXd>& points);

/// Sharing partners of geometry d: none, all others, or grid neighbours
/// (multi-index differing by +-1 in exactly one axis).
std::set<int> partners(const ProblemFamily& family, int d, PartnerRule rule);

/// Mutable state of one optimisation run: information sets, Pauli cache,
/// demand ledger and convergence bookkeeping. The step methods are exposed
/// so tests can drive Algorithm phases directly.
class RunState {
  public:
    RunState(const ProblemFamily& family, const RunConfig& cfg);

    void initialize(const std::vector<Eigen::VectorXd>& x_init);
    void run_iteration(int n);
    /// Deferred (two-phase) iteration; `order` overrides the phase-1
    /// processing order for isolation tests.
    void run_iteration_deferred(int n, const std::vector<int>* order = nullptr);
    void run_iteration_immediate(int n);

    /// Registers an evaluation event; returns its PointId.
    int register_point(int origin_geometry, int iteration, Eigen::VectorXd theta);

    /// Ensures every word of `pauli_set` is cached at `point_id` (evaluating
    /// and charging the ledger for missing ones) and assembles geometry d's
    /// energy. `pauli_set` must cover d's required words.
    double evaluate_objective(int d, int point_id, const std::set<std::string>& pauli_set,
                              const ShotConfig& shot_cfg);

    /// Assembles geometry d_to's energy at an already-registered point,
    /// computing only words missing from the cache.
    double share_to(int d_to, int point_id, const ShotConfig& shot_cfg);

    /// Appends (theta, energy) to I^d, maintaining F^d and the trace.
    void append_info(int d, const Eigen::VectorXd& theta, double energy);

    /// Marks geometries converged after `completed_iterations` iterations.
    void update_convergence(int completed_iterations);

    bool all_converged() const;
    const std::vector<double>& references() const { return references_; }
    const InfoSet& info(int d) const { return info_.at(d); }
    const QCLedger& ledger() const { return ledger_; }
    const std::set<std::string>& eval_set(int d) const { return eval_sets_.at(d); }
    const Eigen::VectorXd& point_theta(int point_id) const;
    ShotConfig shot_config_for_iteration(int n) const;

    RunResult finalize(int iterations_run) const;

  private:
    struct EvalPoint {
        Eigen::VectorXd theta;
        int origin = -1;     // geometry of origin, -1 for shared initial points
        int iteration = -1;  // -1 for initial points
        std::map<std::string, double> values;  // Pauli cache rows of this point
    };

    Eigen::VectorXd select_next(int d, int n, std::size_t info_prefix);
    void compute_missing(EvalPoint& pt, const std::set<std::string>& words,
                         const ShotConfig& shot_cfg, std::uint64_t rng_a, std::uint64_t rng_b);
    double assemble_energy(int d, const EvalPoint& pt) const;
    void charge(long pauli_evals, long shots);

    const ProblemFamily& family_;
    RunConfig cfg_;
    std::vector<double> references_;
    std::vector<std::set<std::string>> required_;
    std::set<std::string> union_required_;
    std::vector<std::set<int>> partners_;
    std::vector<std::set<std::string>> eval_sets_;  // own + partners' words
    std::vector<EvalPoint> points_;
    std::vector<InfoSet> info_;
    std::vector<TraceRow> traces_;
    QCLedger ledger_;
    int current_iteration_ = -1;  // -1 while initialising
    std::optional<int> iteration_of_convergence_;
    long clamp_count_ = 0;
    double clamp_max_ = 0.0;
};

/// Full run: initialise, iterate until the cap or family-wide convergence.
/// Deterministic given (family, config.seed).
RunResult run(const ProblemFamily& family, const RunConfig& cfg);

}  // namespace bois
