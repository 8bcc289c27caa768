// Command-line front end: dataset validation, reference energies, single
// optimisation runs, seeded repetition sweeps and CSV report generation.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "bois/family.hpp"
#include "bois/orchestrator.hpp"
#include "bois/run_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve_family_path(const std::string& given) {
    fs::path p(given);
    if (fs::exists(p)) return p;
    if (const char* dir = std::getenv("BOIS_DATA_DIR"); dir && p.is_relative()) {
        fs::path alt = fs::path(dir) / p;
        if (fs::exists(alt)) return alt;
    }
    return p;  // let the loader report the failure
}

bois::RunConfig parse_scheme(bois::RunConfig cfg, const std::string& scheme) {
    if (scheme == "none") {
        cfg.partners = bois::PartnerRule::NoSharing;
        cfg.timing = bois::Timing::Deferred;
    } else if (scheme == "nn") {
        cfg.partners = bois::PartnerRule::NearestNeighbor;
        cfg.timing = bois::Timing::Deferred;
    } else if (scheme == "all") {
        cfg.partners = bois::PartnerRule::AllToAll;
        cfg.timing = bois::Timing::Deferred;
    } else if (scheme == "immediate-nn") {
        cfg.partners = bois::PartnerRule::NearestNeighbor;
        cfg.timing = bois::Timing::Immediate;
    } else if (scheme == "immediate-all") {
        cfg.partners = bois::PartnerRule::AllToAll;
        cfg.timing = bois::Timing::Immediate;
    } else {
        throw CLI::ValidationError("--scheme", "unknown scheme '" + scheme + "'");
    }
    return cfg;
}

struct RunFlags {
    std::string family;
    std::string scheme = "none";
    std::string kernel = "matern52";
    std::string mode = "exact";
    std::string selector = "gp";
    int iters = 100;
    int nmax_schedule = -1;  // defaults to iters
    int init_points = 30;
    double epsilon = 1e-3;
    double kappa0 = 1.0;
    std::uint64_t seed = 0;
    long shots_init = 8192, shots_iter = 1000, shots_final = 8192;
    std::string out = "out";
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--family", f.family, "family dataset file")->required();
    cmd->add_option("--scheme", f.scheme,
                    "sharing scheme {none|nn|all|immediate-nn|immediate-all}");
    cmd->add_option("--kernel", f.kernel, "GP kernel {matern52|rbf}");
    cmd->add_option("--mode", f.mode, "objective evaluation {exact|shots}");
    cmd->add_option("--iters", f.iters, "iteration cap");
    cmd->add_option("--nmax-schedule", f.nmax_schedule,
                    "kappa decrease denominator (defaults to --iters)");
    cmd->add_option("--init-points", f.init_points, "number of initial points");
    cmd->add_option("--epsilon", f.epsilon, "relative convergence threshold");
    cmd->add_option("--kappa0", f.kappa0, "initial acquisition weight");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--shots-init", f.shots_init, "shots for initial points");
    cmd->add_option("--shots-iter", f.shots_iter, "shots for regular iterations");
    cmd->add_option("--shots-final", f.shots_final, "shots for the final five iterations");
    cmd->add_option("--selector", f.selector,
                    "point selector {gp|random}; random is for demand accounting");
    cmd->add_option("--out", f.out, "output directory");
}

bois::RunConfig make_config(const RunFlags& f, const std::string& scheme,
                            std::uint64_t seed) {
    bois::RunConfig cfg;
    cfg = parse_scheme(cfg, scheme);
    if (f.kernel == "matern52") {
        cfg.kernel = bois::KernelKind::Matern52;
    } else if (f.kernel == "rbf") {
        cfg.kernel = bois::KernelKind::RBF;
    } else {
        throw CLI::ValidationError("--kernel", "unknown kernel '" + f.kernel + "'");
    }
    if (f.mode == "shots") {
        cfg.shot_mode = true;
    } else if (f.mode != "exact") {
        throw CLI::ValidationError("--mode", "unknown mode '" + f.mode + "'");
    }
    if (f.selector == "random") {
        cfg.selector = bois::RunConfig::Selector::Random;
    } else if (f.selector != "gp") {
        throw CLI::ValidationError("--selector", "unknown selector '" + f.selector + "'");
    }
    cfg.n_max = f.iters;
    cfg.n_init = f.init_points;
    cfg.epsilon = f.epsilon;
    cfg.seed = seed;
    cfg.acq.kappa0 = f.kappa0;
    cfg.acq.n_max = f.nmax_schedule > 0 ? f.nmax_schedule : f.iters;
    cfg.shots.init_shots = f.shots_init;
    cfg.shots.iter_shots = f.shots_iter;
    cfg.shots.final_shots = f.shots_final;
    return cfg;
}

std::string run_basename(const bois::RunResult& r) {
    std::ostringstream os;
    os << "run_" << r.scheme << "_" << r.kernel << "_" << r.mode << "_seed" << r.seed;
    return os.str();
}

int write_run_outputs(const bois::RunResult& res, const fs::path& out_dir) {
    const std::string base = run_basename(res);
    bois::write_file(out_dir / (base + ".json"), bois::run_result_to_json(res));
    bois::write_file(out_dir / (base + ".trace.csv"), bois::traces_to_csv(res));
    return res.iteration_of_convergence.has_value() ? 0 : 2;
}

int cmd_validate(const std::string& family_path, double similarity_gamma) {
    const auto path = resolve_family_path(family_path);
    bois::ProblemFamily family = bois::ProblemFamily::load(path);
    std::cout << "family: " << family.molecule() << " (" << family.size() << " geometries";
    if (family.size() > 0) std::cout << ", " << family.n_qubits() << " qubits";
    std::cout << ")\n";
    std::cout << "grid_shape: [";
    for (std::size_t i = 0; i < family.grid_shape().size(); ++i) {
        std::cout << (i ? "," : "") << family.grid_shape()[i];
    }
    std::cout << "]\n";
    for (const auto& g : family.geometries()) {
        std::cout << "  " << g.geometry_id() << ": " << g.terms().size() << " words  ("
                  << g.label() << ")\n";
    }
    std::cout << "union of Pauli words: " << bois::union_required(family).size() << "\n";

    // Pairwise similarity summary (reporting only; no cut-off is applied).
    double min_sim = 1.0, sum = 0.0;
    long pairs = 0, below = 0;
    std::string min_pair;
    for (int i = 0; i < family.size(); ++i) {
        for (int j = i + 1; j < family.size(); ++j) {
            const double s =
                bois::similarity(family.geometries()[i], family.geometries()[j]);
            sum += s;
            ++pairs;
            if (s < similarity_gamma) ++below;
            if (s < min_sim) {
                min_sim = s;
                min_pair = family.geometries()[i].geometry_id() + "," +
                           family.geometries()[j].geometry_id();
            }
        }
    }
    if (pairs > 0) {
        std::cout << "pairwise similarity (1 - phi/pi): mean " << sum / pairs << ", min "
                  << min_sim << " (" << min_pair << ")";
        std::cout << "; pairs below gamma=" << similarity_gamma << ": " << below << "\n";
    }
    std::cout << "content hash: " << family.content_hash() << "\n";
    std::cout << "OK\n";
    return 0;
}

int cmd_reference(const std::string& family_path, const std::string& out_file) {
    const auto path = resolve_family_path(family_path);
    bois::ProblemFamily family = bois::ProblemFamily::load(path);
    std::ostringstream table;
    table << "geometry_id,reference_energy\n";
    table.precision(12);
    for (const auto& g : family.geometries()) {
        const double e = bois::exact_ground_energy(g);
        table << g.geometry_id() << ',' << e << '\n';
    }
    std::cout << table.str();
    if (!out_file.empty()) bois::write_file(out_file, table.str());
    return 0;
}

int cmd_run(const RunFlags& flags) {
    const auto path = resolve_family_path(flags.family);
    bois::ProblemFamily family = bois::ProblemFamily::load(path);
    const bois::RunConfig cfg = make_config(flags, flags.scheme, flags.seed);
    const bois::RunResult res = bois::run(family, cfg);

    std::cout << "scheme=" << res.scheme << " kernel=" << res.kernel << " mode=" << res.mode
              << " seed=" << res.seed << "\n";
    std::cout << "iterations_run=" << res.iterations_run << " converged_at=";
    if (res.iteration_of_convergence.has_value()) {
        std::cout << *res.iteration_of_convergence;
    } else {
        std::cout << "-";
    }
    std::cout << "\nledger: init=" << res.ledger.init_pauli_evals << " total="
              << res.ledger.total_pauli_evals << " shots=" << res.ledger.total_shots << "\n";
    return write_run_outputs(res, flags.out);
}

struct SweepJob {
    std::string scheme;
    int rep = 0;
    std::uint64_t seed = 0;
};

int cmd_sweep(const RunFlags& flags, int reps, int jobs) {
    const auto path = resolve_family_path(flags.family);
    bois::ProblemFamily family = bois::ProblemFamily::load(path);

    std::vector<std::string> schemes;
    {
        std::stringstream ss(flags.scheme);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) schemes.push_back(item);
        }
    }
    if (schemes.empty()) throw CLI::ValidationError("--scheme", "no scheme given");

    std::vector<SweepJob> queue;
    for (const auto& s : schemes) {
        for (int rep = 0; rep < reps; ++rep) {
            queue.push_back({s, rep, flags.seed + static_cast<std::uint64_t>(rep)});
        }
    }

    std::vector<bois::RunResult> results(queue.size());
    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= queue.size()) return;
            const SweepJob& job = queue[k];
            const bois::RunConfig cfg = make_config(flags, job.scheme, job.seed);
            results[k] = bois::run(family, cfg);
            std::lock_guard<std::mutex> lock(io_mutex);
            std::cout << "[" << job.scheme << " rep " << job.rep << "] converged_at=";
            if (results[k].iteration_of_convergence.has_value()) {
                std::cout << *results[k].iteration_of_convergence;
            } else {
                std::cout << "-";
            }
            std::cout << " total_paulis=" << results[k].ledger.total_pauli_evals << std::endl;
        }
    };
    {
        std::vector<std::thread> pool;
        const int n_threads = std::max(1, jobs);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const fs::path out_dir(flags.out);
    bool any_capped = false;

    // Per-scheme summary; statistics over converged repetitions only.
    json summary;
    summary["schema"] = "bois-sweep-1";
    summary["family_path"] = path.string();
    summary["family_hash"] = family.content_hash();
    summary["repetitions"] = reps;
    summary["base_seed"] = flags.seed;
    json per_scheme = json::object();
    std::ostringstream hist_csv;
    hist_csv << "scheme,iteration_of_convergence,count\n";

    for (const auto& scheme : schemes) {
        std::vector<const bois::RunResult*> runs;
        for (std::size_t k = 0; k < queue.size(); ++k) {
            if (queue[k].scheme == scheme) runs.push_back(&results[k]);
        }
        std::vector<int> converged;
        long total_paulis = 0;
        std::map<int, int> bins;
        json reps_json = json::array();
        for (const auto* r : runs) {
            total_paulis += r->ledger.total_pauli_evals;
            json rj;
            rj["seed"] = r->seed;
            rj["x_init_hash"] = r->x_init_hash;
            if (r->iteration_of_convergence.has_value()) {
                converged.push_back(*r->iteration_of_convergence);
                bins[*r->iteration_of_convergence] += 1;
                rj["iteration_of_convergence"] = *r->iteration_of_convergence;
            } else {
                rj["iteration_of_convergence"] = nullptr;
                any_capped = true;
            }
            reps_json.push_back(std::move(rj));
            const std::string base = run_basename(*r);
            bois::write_file(out_dir / (base + ".json"), bois::run_result_to_json(*r));
            bois::write_file(out_dir / (base + ".trace.csv"), bois::traces_to_csv(*r));
        }
        json sj;
        sj["repetitions"] = reps_json;
        sj["converged_count"] = converged.size();
        sj["did_not_converge_count"] = runs.size() - converged.size();
        if (!converged.empty()) {
            double mean = 0;
            for (int v : converged) mean += v;
            mean /= static_cast<double>(converged.size());
            std::vector<int> sorted = converged;
            std::sort(sorted.begin(), sorted.end());
            const double median =
                sorted.size() % 2 ? sorted[sorted.size() / 2]
                                  : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
            sj["mean_iteration_of_convergence"] = mean;
            sj["median_iteration_of_convergence"] = median;
        }
        sj["total_pauli_evals"] = total_paulis;
        per_scheme[scheme] = std::move(sj);
        for (const auto& [iter, count] : bins) {
            hist_csv << scheme << ',' << iter << ',' << count << '\n';
        }
    }

    // Paired repetitions share X_init across schemes by construction; verify.
    bool paired_ok = true;
    for (int rep = 0; rep < reps; ++rep) {
        std::string h;
        for (std::size_t k = 0; k < queue.size(); ++k) {
            if (queue[k].rep != rep) continue;
            if (h.empty()) {
                h = results[k].x_init_hash;
            } else if (h != results[k].x_init_hash) {
                paired_ok = false;
            }
        }
    }
    summary["x_init_paired_across_schemes"] = paired_ok;
    summary["schemes"] = std::move(per_scheme);

    bois::write_file(out_dir / "sweep_summary.json", summary.dump(1) + "\n");
    bois::write_file(out_dir / "histogram.csv", hist_csv.str());
    std::cout << "sweep summary written to " << (out_dir / "sweep_summary.json") << std::endl;
    return any_capped ? 2 : 0;
}

int cmd_report(const std::vector<std::string>& run_files, const std::string& out) {
    if (run_files.empty()) throw CLI::ValidationError("report", "need at least one run file");
    std::vector<bois::RunResult> runs;
    for (const auto& f : run_files) runs.push_back(bois::run_result_from_json_file(f));

    const std::string& hash = runs.front().family_hash;
    for (const auto& r : runs) {
        if (r.family_hash != hash) {
            throw std::runtime_error("report: mixed-family inputs (family hash mismatch)");
        }
    }

    // Merged convergence traces.
    std::ostringstream traces;
    traces << "scheme,seed,geometry_id,energy_eval_index,best_seen,rel_deviation\n";
    traces.precision(17);
    for (const auto& r : runs) {
        for (const auto& row : r.traces) {
            traces << r.scheme << ',' << r.seed << ',' << r.geometries.at(row.geometry).id << ','
                   << row.eval_index << ',' << row.best_seen << ',' << row.rel_deviation << '\n';
        }
    }

    // Demand comparison: init / per-iteration / all-iterations / total.
    std::ostringstream demand;
    demand << "scheme,seed,iterations,init,per_iteration,all_iterations,total\n";
    for (const auto& r : runs) {
        long per_iter = 0;
        bool constant = !r.ledger.per_iteration_pauli_evals.empty();
        if (constant) {
            per_iter = r.ledger.per_iteration_pauli_evals.front();
            for (long v : r.ledger.per_iteration_pauli_evals) {
                if (v != per_iter) constant = false;
            }
        }
        long all_iters = 0;
        for (long v : r.ledger.per_iteration_pauli_evals) all_iters += v;
        demand << r.scheme << ',' << r.seed << ',' << r.iterations_run << ','
               << r.ledger.init_pauli_evals << ',';
        if (constant) {
            demand << per_iter;
        } else {
            demand << "varying";
        }
        demand << ',' << all_iters << ',' << r.ledger.total_pauli_evals << '\n';
    }

    // Histogram of iterations of convergence by scheme.
    std::map<std::string, std::map<int, int>> hist;
    std::map<std::string, int> dnc;
    for (const auto& r : runs) {
        if (r.iteration_of_convergence.has_value()) {
            hist[r.scheme][*r.iteration_of_convergence] += 1;
        } else {
            dnc[r.scheme] += 1;
        }
    }
    std::ostringstream hist_csv;
    hist_csv << "scheme,iteration_of_convergence,count\n";
    for (const auto& [scheme, bins] : hist) {
        for (const auto& [iter, count] : bins) {
            hist_csv << scheme << ',' << iter << ',' << count << '\n';
        }
    }
    for (const auto& [scheme, count] : dnc) {
        hist_csv << scheme << ",did_not_converge," << count << '\n';
    }

    const fs::path out_dir(out);
    bois::write_file(out_dir / "traces.csv", traces.str());
    bois::write_file(out_dir / "demand.csv", demand.str());
    bois::write_file(out_dir / "histogram.csv", hist_csv.str());
    std::cout << "report written to " << out_dir << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian optimisation with information sharing for VQE energy surfaces"};
    app.require_subcommand(1);

    std::string family_path;
    std::string out_file = "references.csv";
    double similarity_gamma = 0.5;
    auto* validate = app.add_subcommand("validate", "check a family dataset file");
    validate->add_option("--family", family_path, "family dataset file")->required();
    validate->add_option("--similarity-gamma", similarity_gamma,
                         "similarity threshold reported against (no cut-off is applied)");

    auto* reference = app.add_subcommand("reference", "exact ground energies per geometry");
    reference->add_option("--family", family_path, "family dataset file")->required();
    reference->add_option("--out", out_file, "write the table to this file");

    RunFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "execute one optimisation run");
    add_run_flags(run_cmd, run_flags);

    RunFlags sweep_flags;
    int reps = 1, jobs = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "seeded repetitions (paired across schemes)");
    add_run_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--reps", reps, "number of repetitions (seeds base..base+reps-1)");
    sweep_cmd->add_option("--jobs", jobs, "concurrent repetitions");

    std::vector<std::string> report_files;
    std::string report_out = "report";
    auto* report_cmd = app.add_subcommand("report", "merge run files into CSV tables");
    report_cmd->add_option("files", report_files, "run .json files")->required();
    report_cmd->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(family_path, similarity_gamma);
        if (reference->parsed()) return cmd_reference(family_path, out_file);
        if (run_cmd->parsed()) return cmd_run(run_flags);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags, reps, jobs);
        if (report_cmd->parsed()) return cmd_report(report_files, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 1;
}
