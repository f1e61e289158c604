#include "stpg/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "stpg/errors.hpp"

namespace stpg {
namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ProblemSpec problem_for(const ExperimentConfig& config) {
    ProblemParams params;
    params.epsilon = config.epsilon;
    params.impulse_time = config.impulse_time;
    if (config.problem == "impulse") params.dimension = 1;
    return make_problem(config.problem, params);
}

void log(bool quiet, const std::string& line) {
    if (!quiet) std::cerr << line << '\n';
}

void fit(ExperimentResult& result) {
    std::vector<std::pair<double, double>> u1, u2;
    for (const auto& level : result.levels) {
        if (!level.errors) return;
        u1.emplace_back(level.k, level.errors->err_u1_L2V);
        u2.emplace_back(level.k, level.errors->err_u2_nodal_max);
    }
    if (u1.size() < 2) return;
    result.pairwise_u1 = pairwise_rates(u1);
    result.pairwise_u2 = pairwise_rates(u2);
    try {
        result.rate_u1 = fit_rate(u1);
        result.rate_u2 = fit_rate(u2);
    } catch (const std::invalid_argument&) {
        // zero errors (e.g. exact reproduction) leave the rates undefined
        result.rate_u1.reset();
        result.rate_u2.reset();
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw OutputError("failed writing '" + path.string() + "'");
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    c.name = get_or<std::string>(j, "name", c.name);
    c.problem = get_or<std::string>(j, "problem", c.problem);
    c.epsilon = get_or<double>(j, "epsilon", c.epsilon);
    c.impulse_time = get_or<double>(j, "impulse_time", c.impulse_time);
    c.q = get_or<int>(j, "q", c.q);
    c.p = get_or<int>(j, "p", c.p);
    c.levels = get_or<std::vector<int>>(j, "levels", {});
    if (j.contains("coupling")) {
        const auto& cp = j.at("coupling");
        if (!cp.is_object()) throw ConfigError("'coupling' must be an object {c, gamma}");
        c.coupling_c = get_or<double>(cp, "c", c.coupling_c);
        c.coupling_gamma = get_or<double>(cp, "gamma", c.coupling_gamma);
    }
    c.intervals = get_or<std::vector<int>>(j, "intervals", {});
    c.compute_errors = get_or<bool>(j, "compute_errors", c.compute_errors);
    c.stability = get_or<bool>(j, "stability", c.stability);
    c.diagnostics = get_or<bool>(j, "diagnostics", c.diagnostics);
    c.write_solutions = get_or<bool>(j, "write_solutions", c.write_solutions);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.time_quadrature_points = get_or<int>(j, "time_quadrature_points", c.time_quadrature_points);
    c.max_cs_intervals = get_or<int>(j, "max_cs_intervals", c.max_cs_intervals);
    c.rate_tolerance = get_or<double>(j, "rate_tolerance", c.rate_tolerance);

    static const std::vector<std::string> known{"heat1d-smooth", "heat2d-smooth", "heat1d-lowreg",
                                                "impulse"};
    if (std::find(known.begin(), known.end(), c.problem) == known.end())
        throw ConfigError("unknown problem id '" + c.problem + "'");
    if (c.levels.empty()) throw ConfigError("'levels' must be a nonempty list");
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
        if (c.levels[i] < 2) throw ConfigError("levels must be >= 2 elements per side");
        if (i > 0 && c.levels[i] <= c.levels[i - 1])
            throw ConfigError("'levels' must be strictly increasing");
    }
    if (!(c.coupling_gamma > 0.0)) throw ConfigError("coupling gamma must be > 0");
    if (!(c.coupling_c > 0.0)) throw ConfigError("coupling c must be > 0");
    if (!c.intervals.empty()) {
        if (c.intervals.size() != c.levels.size())
            throw ConfigError("'intervals' must have one entry per level");
        for (int n : c.intervals)
            if (n < 1) throw ConfigError("'intervals' entries must be >= 1");
    }
    if (c.q < 0) throw ConfigError("q must be >= 0");
    if (c.p < 1 || c.p > 3) throw ConfigError("p must be 1, 2 or 3");
    if (c.problem == "heat1d-lowreg" && !(c.epsilon > 0.0 && c.epsilon < 1.0))
        throw ConfigError("epsilon must lie in (0, 1)");
    if (c.max_cs_intervals < 1) throw ConfigError("max_cs_intervals must be >= 1");
    if (c.time_quadrature_points < 0) throw ConfigError("time_quadrature_points must be >= 0");
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j{{"name", c.name},
                     {"problem", c.problem},
                     {"epsilon", c.epsilon},
                     {"impulse_time", c.impulse_time},
                     {"q", c.q},
                     {"p", c.p},
                     {"levels", c.levels},
                     {"coupling", {{"c", c.coupling_c}, {"gamma", c.coupling_gamma}}},
                     {"compute_errors", c.compute_errors},
                     {"stability", c.stability},
                     {"diagnostics", c.diagnostics},
                     {"write_solutions", c.write_solutions},
                     {"seed", c.seed},
                     {"output_dir", c.output_dir},
                     {"time_quadrature_points", c.time_quadrature_points},
                     {"max_cs_intervals", c.max_cs_intervals},
                     {"rate_tolerance", c.rate_tolerance}};
    if (!c.intervals.empty()) j["intervals"] = c.intervals;
    return j;
}

int intervals_for_level(const ExperimentConfig& config, std::size_t level, double final_time) {
    if (!config.intervals.empty()) return config.intervals.at(level);
    const double h = 1.0 / config.levels.at(level);
    const double k = config.coupling_c * std::pow(h, config.coupling_gamma);
    return std::max(1, static_cast<int>(std::lround(final_time / k)));
}

LevelResult run_level(const ExperimentConfig& config, const ProblemSpec& problem, std::size_t level,
                      bool keep_solution) {
    LevelResult r;
    r.n = config.levels.at(level);
    r.intervals = intervals_for_level(config, level, problem.final_time);
    r.h = 1.0 / r.n;
    const auto space = FemSpace::assemble(problem.dimension, r.n, config.p);
    const auto partition = TimePartition::uniform(problem.final_time, r.intervals);
    r.k = partition.k_max();
    r.dofs = space.dof_count();
    SolverOptions options;
    options.time_quadrature_points = config.time_quadrature_points;

    auto solution = run_decomposed(problem, space, partition, config.q, options);
    if (config.compute_errors) r.errors = error_norms(space, problem, solution);
    if (config.stability && problem.impulses.empty())
        r.stability = stability_check(problem, space, solution, options, config.max_cs_intervals);
    r.cfl = cfl_constant(spectral_values(space), r.k);
    if (config.diagnostics) {
        try {
            r.diagnostics = diagnose(space, partition, config.q);
        } catch (const std::invalid_argument& e) {
            r.diagnostics_note = e.what();
        }
    }
    if (keep_solution) r.solution = std::move(solution);
    return r;
}

ExperimentResult run_levels(const ExperimentConfig& config, int workers, bool quiet) {
    const auto problem = problem_for(config);
    if (config.compute_errors && !problem.exact)
        throw std::invalid_argument("problem '" + problem.id + "' has no exact solution");
    check_manufactured(problem, config.seed);

    ExperimentResult result;
    result.config = config;
    const std::size_t count = config.levels.size();
    result.levels.resize(count);
    std::vector<std::exception_ptr> failures(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                result.levels[i] = run_level(config, problem, i, config.write_solutions);
                log(quiet, "[" + config.name + "] level n=" + std::to_string(config.levels[i]) +
                               " N=" + std::to_string(result.levels[i].intervals) + " done");
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    fit(result);
    return result;
}

ExperimentResult run_diagnostics(const ExperimentConfig& config, bool quiet) {
    const auto problem = problem_for(config);
    ExperimentResult result;
    result.config = config;
    for (std::size_t i = 0; i < config.levels.size(); ++i) {
        LevelResult r;
        r.n = config.levels[i];
        r.intervals = intervals_for_level(config, i, problem.final_time);
        r.h = 1.0 / r.n;
        const auto space = FemSpace::assemble(problem.dimension, r.n, config.p);
        const auto partition = TimePartition::uniform(problem.final_time, r.intervals);
        r.k = partition.k_max();
        r.dofs = space.dof_count();
        r.cfl = cfl_constant(spectral_values(space), r.k);
        r.diagnostics = diagnose(space, partition, config.q);
        log(quiet, "[" + config.name + "] diagnostics n=" + std::to_string(r.n) + " done");
        result.levels.push_back(std::move(r));
    }
    return result;
}

nlohmann::json summary_json(const ExperimentResult& result) {
    const auto& c = result.config;
    nlohmann::json j;
    j["name"] = c.name;
    j["problem"] = c.problem;
    j["q"] = c.q;
    j["p"] = c.p;
    j["config"] = to_json(c);
    auto& levels = j["levels"] = nlohmann::json::array();
    bool stable = true;
    bool any_stability = false;
    for (const auto& l : result.levels) {
        nlohmann::json e{{"n", l.n}, {"N", l.intervals}, {"h", l.h}, {"k", l.k},
                         {"dofs", l.dofs}, {"C_CFL", l.cfl}};
        if (l.errors) {
            e["err_u1_L2V"] = l.errors->err_u1_L2V;
            e["err_u2_nodal_max"] = l.errors->err_u2_nodal_max;
            e["err_u2_nodal_final"] = l.errors->err_u2_nodal_final;
        }
        if (l.stability) {
            e["stability"] = to_json(*l.stability);
            any_stability = true;
            stable = stable && l.stability->holds;
        }
        if (l.diagnostics) e["diagnostics"] = to_json(*l.diagnostics);
        if (!l.diagnostics_note.empty()) e["diagnostics_note"] = l.diagnostics_note;
        levels.push_back(std::move(e));
    }
    const double expected_u1 = c.q + 1.0;
    const double expected_u2 = 2.0 * (c.q + 1.0);
    j["expected"] = {{"u1", expected_u1}, {"u2", expected_u2}};
    nlohmann::json rates = nlohmann::json::object();
    nlohmann::json pass = nlohmann::json::object();
    if (result.rate_u1 && result.rate_u2) {
        rates["u1"] = *result.rate_u1;
        rates["u2"] = *result.rate_u2;
        rates["pairwise_u1"] = result.pairwise_u1;
        rates["pairwise_u2"] = result.pairwise_u2;
        pass["u1"] = std::abs(*result.rate_u1 - expected_u1) <= c.rate_tolerance;
        pass["u2"] = std::abs(*result.rate_u2 - expected_u2) <= c.rate_tolerance;
    }
    if (any_stability) pass["stability"] = stable;
    j["rates"] = rates;
    j["pass"] = pass;
    return j;
}

std::string rates_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "N,h,k,err_u1_L2V,err_u2_nodal_max,rate_u1,rate_u2\n";
    for (std::size_t i = 0; i < result.levels.size(); ++i) {
        const auto& l = result.levels[i];
        const double e1 = l.errors ? l.errors->err_u1_L2V : std::nan("");
        const double e2 = l.errors ? l.errors->err_u2_nodal_max : std::nan("");
        const double r1 = i < result.pairwise_u1.size() ? result.pairwise_u1[i] : std::nan("");
        const double r2 = i < result.pairwise_u2.size() ? result.pairwise_u2[i] : std::nan("");
        out << l.intervals << ',' << format_number(l.h) << ',' << format_number(l.k) << ','
            << format_number(e1) << ',' << format_number(e2) << ',' << format_number(r1) << ','
            << format_number(r2) << '\n';
    }
    return out.str();
}

std::string loglog_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "log10_k,log10_err_u1_L2V,log10_err_u2_nodal_max\n";
    for (const auto& l : result.levels) {
        if (!l.errors) continue;
        out << format_number(std::log10(l.k)) << ','
            << format_number(std::log10(l.errors->err_u1_L2V)) << ','
            << format_number(std::log10(l.errors->err_u2_nodal_max)) << '\n';
    }
    return out.str();
}

void emit_report(const ExperimentResult& result, const std::string& dir) {
    if (result.levels.empty()) throw OutputError("no completed levels to report");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw OutputError("cannot create output directory '" + dir + "': " + ec.message());
    const fs::path base(dir);
    write_file(base / "rates.csv", rates_csv(result));
    write_file(base / "loglog.csv", loglog_csv(result));
    write_file(base / "summary.json", summary_json(result).dump(2) + "\n");
    bool any_diagnostics = false;
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& l : result.levels) {
        if (!l.diagnostics) continue;
        any_diagnostics = true;
        auto e = to_json(*l.diagnostics);
        e["n"] = l.n;
        e["N"] = l.intervals;
        diag.push_back(std::move(e));
    }
    if (any_diagnostics) write_file(base / "diagnostics.json", diag.dump(2) + "\n");
    for (const auto& l : result.levels)
        if (l.solution)
            write_file(base / ("solution_" + std::to_string(l.n) + ".json"),
                       to_json(*l.solution).dump() + "\n");
}

std::string resolve_output_dir(const ExperimentConfig& config, const RunOptions& options) {
    if (options.output_dir) return *options.output_dir;
    if (const char* env = std::getenv("STPG_OUTPUT_DIR"); env && *env) return env;
    return config.output_dir;
}

int run_experiment(const std::string& config_path, const RunOptions& options) {
    ExperimentConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (!options.diagnostics_only && config.compute_errors) {
        ProblemParams params;
        params.epsilon = config.epsilon;
        params.impulse_time = config.impulse_time;
        if (!make_problem(config.problem, params).exact) {
            std::cerr << "error: problem '" << config.problem
                      << "' has no exact solution but error computation was requested\n";
            return kExitMissingExact;
        }
    }
    ExperimentResult result;
    try {
        result = options.diagnostics_only ? run_diagnostics(config, options.quiet)
                                          : run_levels(config, options.workers, options.quiet);
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
    try {
        emit_report(result, resolve_output_dir(config, options));
    } catch (const OutputError& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return kExitOutput;
    }
    if (!options.quiet) std::cout << summary_json(result).dump(2) << '\n';
    return kExitOk;
}

}  // namespace stpg
