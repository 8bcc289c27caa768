#include "bois/run_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace bois {

using nlohmann::json;

namespace {

json config_to_json(const RunConfig& cfg) {
    json j;
    j["scheme"] = scheme_name(cfg);
    j["kernel"] = kernel_name(cfg.kernel);
    j["mode"] = cfg.shot_mode ? "shots" : "exact";
    j["n_max"] = cfg.n_max;
    j["n_init"] = cfg.n_init;
    j["epsilon"] = cfg.epsilon;
    j["seed"] = cfg.seed;
    j["kappa0"] = cfg.acq.kappa0;
    j["kappa_schedule_n_max"] = cfg.acq.n_max;
    j["acq_starts"] = cfg.acq.n_starts;
    j["acq_max_iters"] = cfg.acq.max_iters;
    j["gp_restarts"] = cfg.gp_restarts;
    j["gp_max_iters"] = cfg.gp_max_iters;
    j["gp_start_distribution"] = "log-uniform";
    j["geometry_order"] = "ascending";
    j["selector"] = cfg.selector == RunConfig::Selector::Gp ? "gp" : "random";
    j["depolarizing_p"] = cfg.depolarizing_p;
    if (cfg.shot_mode) {
        j["shots"] = {{"init", cfg.shots.init_shots},
                      {"iteration", cfg.shots.iter_shots},
                      {"final", cfg.shots.final_shots},
                      {"final_window", cfg.shots.final_window}};
    }
    return j;
}

}  // namespace

namespace {

std::string fnv_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace

std::string run_result_to_json(const RunResult& result) {
    json j;
    j["schema"] = "bois-run-1";
    j["metadata"] = config_to_json(result.config);
    j["metadata"]["config_hash"] = fnv_hex(j["metadata"].dump());
    j["metadata"]["family_path"] = result.family_path;
    j["metadata"]["family_hash"] = result.family_hash;
    j["metadata"]["x_init_hash"] = result.x_init_hash;
    j["metadata"]["gp_variance_clamp_count"] = result.gp_variance_clamp_count;
    j["metadata"]["gp_variance_clamp_max"] = result.gp_variance_clamp_max;

    j["iterations_run"] = result.iterations_run;
    if (result.iteration_of_convergence.has_value()) {
        j["iteration_of_convergence"] = *result.iteration_of_convergence;
    } else {
        j["iteration_of_convergence"] = nullptr;
    }

    j["ledger"] = {{"init_pauli_evals", result.ledger.init_pauli_evals},
                   {"per_iteration_pauli_evals", result.ledger.per_iteration_pauli_evals},
                   {"total_pauli_evals", result.ledger.total_pauli_evals},
                   {"total_shots", result.ledger.total_shots}};

    json geoms = json::array();
    for (const auto& g : result.geometries) {
        json gj;
        gj["id"] = g.id;
        gj["reference"] = g.reference;
        gj["best_energy"] = g.best_energy;
        std::vector<double> theta(g.best_theta.data(), g.best_theta.data() + g.best_theta.size());
        gj["best_theta"] = theta;
        if (g.convergence_iteration.has_value()) {
            gj["convergence_iteration"] = *g.convergence_iteration;
        } else {
            gj["convergence_iteration"] = nullptr;
        }
        gj["n_evals"] = g.n_evals;
        geoms.push_back(std::move(gj));
    }
    j["geometries"] = std::move(geoms);

    json traces = json::array();
    for (const auto& row : result.traces) {
        traces.push_back({{"g", row.geometry},
                          {"i", row.eval_index},
                          {"best", row.best_seen},
                          {"rel", row.rel_deviation}});
    }
    j["traces"] = std::move(traces);
    return j.dump(1);
}

RunResult run_result_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run file: " + path.string());
    json j;
    in >> j;
    if (j.value("schema", "") != "bois-run-1") {
        throw std::runtime_error("run file '" + path.string() + "': unknown schema");
    }

    RunResult res;
    const auto& meta = j.at("metadata");
    res.scheme = meta.at("scheme").get<std::string>();
    res.kernel = meta.at("kernel").get<std::string>();
    res.mode = meta.at("mode").get<std::string>();
    res.seed = meta.at("seed").get<std::uint64_t>();
    res.family_path = meta.at("family_path").get<std::string>();
    res.family_hash = meta.at("family_hash").get<std::string>();
    res.x_init_hash = meta.at("x_init_hash").get<std::string>();

    res.iterations_run = j.at("iterations_run").get<int>();
    if (!j.at("iteration_of_convergence").is_null()) {
        res.iteration_of_convergence = j.at("iteration_of_convergence").get<int>();
    }

    const auto& lj = j.at("ledger");
    res.ledger.init_pauli_evals = lj.at("init_pauli_evals").get<long>();
    res.ledger.per_iteration_pauli_evals =
        lj.at("per_iteration_pauli_evals").get<std::vector<long>>();
    res.ledger.total_pauli_evals = lj.at("total_pauli_evals").get<long>();
    res.ledger.total_shots = lj.at("total_shots").get<long>();

    for (const auto& gj : j.at("geometries")) {
        GeometryResult g;
        g.id = gj.at("id").get<std::string>();
        g.reference = gj.at("reference").get<double>();
        g.best_energy = gj.at("best_energy").get<double>();
        const auto theta = gj.at("best_theta").get<std::vector<double>>();
        g.best_theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
        if (!gj.at("convergence_iteration").is_null()) {
            g.convergence_iteration = gj.at("convergence_iteration").get<int>();
        }
        g.n_evals = gj.at("n_evals").get<long>();
        res.geometries.push_back(std::move(g));
    }

    for (const auto& tj : j.at("traces")) {
        TraceRow row;
        row.geometry = tj.at("g").get<int>();
        row.eval_index = tj.at("i").get<long>();
        row.best_seen = tj.at("best").get<double>();
        row.rel_deviation = tj.at("rel").get<double>();
        res.traces.push_back(row);
    }
    return res;
}

std::string traces_to_csv(const RunResult& result) {
    std::ostringstream os;
    os << "geometry_id,energy_eval_index,best_seen,rel_deviation\n";
    os.precision(17);
    for (const auto& row : result.traces) {
        os << result.geometries.at(row.geometry).id << ',' << row.eval_index << ','
           << row.best_seen << ',' << row.rel_deviation << '\n';
    }
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << content;
}

}  // namespace bois
