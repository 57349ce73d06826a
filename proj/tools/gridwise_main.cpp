// gridwise — deterministic simulator of hierarchical grid scheduling with
// node-local knowledge modules (rough-set rule induction + case-based
// reasoning) driving admission, announcements and pricing.

#include "gridwise/config.hpp"
#include "gridwise/log.hpp"
#include "gridwise/metrics.hpp"
#include "gridwise/simulation.hpp"
#include "gridwise/workload.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gridwise;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitUsage = 64;

struct RunOptions {
    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed = 42;
    int reps = 15;
    double scale = 1.0;
    bool baseline = false;
    bool trace = false;
    bool log_announcements = false;
    bool dump_records = false;
    bool long_format = false;
};

int report_violations(const std::vector<Violation>& violations) {
    for (const auto& v : violations)
        std::cerr << v.path << ": " << v.message << '\n';
    std::cerr << violations.size() << " violation(s)\n";
    return kExitValidation;
}

int cmd_validate(const std::string& path) {
    const ScenarioConfig cfg = load_scenario(path);
    const auto violations = validate(cfg);
    if (!violations.empty())
        return report_violations(violations);
    std::cout << "scenario ok: " << cfg.local_schedulers.size() << " local schedulers, "
              << cfg.job_groups.size() << " job groups\n";
    return kExitOk;
}

int cmd_run(const RunOptions& opt) {
    ScenarioConfig cfg = load_scenario(opt.scenario_path);
    const auto violations = validate(cfg);
    if (!violations.empty())
        return report_violations(violations);
    if (opt.scale != 1.0)
        cfg = scaled(cfg, opt.scale);

    fs::create_directories(opt.out_dir);

    std::ofstream trace_out;
    std::ofstream ann_out;
    MatrixOptions mo;
    mo.base_seed = opt.seed;
    mo.replications = opt.reps;
    mo.include_baseline = opt.baseline;
    if (opt.trace) {
        trace_out.open(fs::path(opt.out_dir) / "events.ndjson", std::ios::binary);
        mo.sinks.trace = [&trace_out](const Event& ev) { trace_out << event_to_ndjson(ev) << '\n'; };
    }
    if (opt.log_announcements) {
        ann_out.open(fs::path(opt.out_dir) / "announcements.ndjson", std::ios::binary);
        mo.sinks.announcements = [&ann_out](const NodeAnnouncement& a, AnnounceCause cause) {
            ann_out << announcement_to_ndjson(a, cause) << '\n';
        };
    }
    if (opt.dump_records) {
        mo.on_run_end = [&opt](const Simulation& sim, const RunLog& log) {
            const fs::path dir = fs::path(opt.out_dir) / "records" /
                                 (log.group + "_" + log.ls_id + "_" + log.policy + "_" +
                                  std::to_string(log.seed));
            fs::create_directories(dir);
            for (const auto& node : sim.nodes()) {
                std::ofstream out(dir / ("node_" + std::to_string(node.id()) + ".csv"),
                                  std::ios::binary);
                out << node.records().to_csv();
                if (node.model()) {
                    std::ofstream rules(dir / ("node_" + std::to_string(node.id()) + ".rules.json"),
                                        std::ios::binary);
                    rules << rs::to_json(*node.model()) << '\n';
                }
            }
        };
    }

    GRIDWISE_LOG(LogLevel::Info, "running " << cfg.job_groups.size() * cfg.local_schedulers.size()
                                            << " combinations x " << opt.reps << " replications");
    const auto logs = run_matrix(cfg, mo);

    std::vector<metrics::RunMetrics> rows;
    rows.reserve(logs.size());
    for (const auto& log : logs)
        rows.push_back(metrics::compute(log));

    auto write_file = [&](const char* name, const std::string& body) {
        std::ofstream out(fs::path(opt.out_dir) / name, std::ios::binary);
        out << body;
    };
    write_file("metrics.csv", metrics::metrics_csv(rows));
    write_file("allocations.csv", metrics::allocations_csv(logs));
    write_file("summary.json", metrics::summary_json(rows));
    if (opt.long_format)
        write_file("metrics_long.csv", metrics::long_csv(rows));

    std::cout << "wrote " << rows.size() << " result rows to " << opt.out_dir << '\n';
    return kExitOk;
}

int cmd_dump_scenario(const std::string& path, double scale, std::uint64_t seed,
                      const std::string& out_file) {
    ScenarioConfig cfg = load_scenario(path);
    const auto violations = validate(cfg);
    if (!violations.empty())
        return report_violations(violations);
    if (scale != 1.0)
        cfg = scaled(cfg, scale);

    using json = nlohmann::ordered_json;
    json dump;
    dump["scenario"] = json::parse(scenario_to_string(cfg));
    dump["nodes"] = json::array();
    for (const auto& ls : cfg.local_schedulers) {
        for (const auto& spec : workload::build_nodes(ls, cfg.params.build, seed)) {
            const auto setup = workload::draw_runtime_setup(spec, ls, cfg.params.build, seed);
            json n;
            n["node_id"] = spec.node_id;
            n["local_scheduler_id"] = spec.local_scheduler_id;
            n["grid_mips"] = spec.grid_mips;
            n["total_ram_mb"] = spec.total_ram_mb;
            n["dtr_base"] = spec.dtr_base;
            n["dependability"] = spec.dependability;
            n["standard_price_alpha"] = spec.standard_price_alpha;
            n["price_tolerance_p"] = spec.price_tolerance_p;
            n["local_cpu_load"] = setup.local_cpu_load;
            n["local_ram_used_mb"] = setup.local_ram_used_mb;
            n["initial_backlog_s"] = setup.backlog_s;
            dump["nodes"].push_back(std::move(n));
        }
    }
    dump["jobs"] = json::array();
    for (const auto& jg : cfg.job_groups) {
        for (const auto& job : workload::build_jobs(jg)) {
            json j;
            j["group"] = jg.name;
            j["job_id"] = job.job_id;
            j["consumer_id"] = job.consumer_id;
            j["task_count"] = job.tasks.size();
            j["reliability_weight"] = job.reliability_weight;
            j["completion_weight"] = job.completion_weight;
            if (!job.tasks.empty()) {
                j["length_mi"] = job.tasks.front().length_mi;
                j["memory_mb"] = job.tasks.front().memory_mb;
                j["deadline_s"] = job.tasks.front().deadline_s;
            }
            dump["jobs"].push_back(std::move(j));
        }
    }

    const std::string body = dump.dump(2) + "\n";
    if (out_file.empty()) {
        std::cout << body;
    } else {
        std::ofstream out(out_file, std::ios::binary);
        out << body;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridwise: hierarchical grid scheduling simulator with node-local "
                 "rough-set/CBR knowledge modules"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "check a scenario file against all invariants");
    validate_cmd->add_option("scenario", validate_path, "scenario file")->required();

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "run the group x scheduler matrix and emit metrics");
    run_cmd->add_option("scenario", run_opt.scenario_path, "scenario file")->required();
    run_cmd->add_option("--seed", run_opt.seed, "base seed (replication r uses seed+r)");
    run_cmd->add_option("--reps", run_opt.reps, "replications per combination")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", run_opt.out_dir, "output directory")->required();
    run_cmd->add_option("--scale", run_opt.scale, "shrink node and task counts proportionally")
        ->check(CLI::PositiveNumber);
    run_cmd->add_flag("--baseline", run_opt.baseline,
                      "also run the naive random-admitting baseline");
    run_cmd->add_flag("--trace", run_opt.trace, "write the event log (events.ndjson)");
    run_cmd->add_flag("--log-announcements", run_opt.log_announcements,
                      "write announcements.ndjson");
    run_cmd->add_flag("--dump-records", run_opt.dump_records,
                      "dump per-node record tables at run end");
    run_cmd->add_flag("--long-csv", run_opt.long_format, "also write metrics_long.csv");

    RunOptions trace_opt;
    auto* trace_cmd = app.add_subcommand("trace", "run with the event log enabled");
    trace_cmd->add_option("scenario", trace_opt.scenario_path, "scenario file")->required();
    trace_cmd->add_option("--seed", trace_opt.seed, "base seed");
    trace_cmd->add_option("--reps", trace_opt.reps, "replications per combination")
        ->check(CLI::PositiveNumber);
    trace_cmd->add_option("--out", trace_opt.out_dir, "output directory")->required();
    trace_cmd->add_option("--scale", trace_opt.scale, "shrink node and task counts proportionally")
        ->check(CLI::PositiveNumber);
    trace_cmd->add_flag("--baseline", trace_opt.baseline,
                        "also run the naive random-admitting baseline");

    std::string dump_path, dump_out;
    double dump_scale = 1.0;
    std::uint64_t dump_seed = 42;
    auto* dump_cmd =
        app.add_subcommand("dump-scenario", "write the fully expanded population for audit");
    dump_cmd->add_option("scenario", dump_path, "scenario file")->required();
    dump_cmd->add_option("--scale", dump_scale, "shrink node and task counts proportionally")
        ->check(CLI::PositiveNumber);
    dump_cmd->add_option("--seed", dump_seed, "population seed");
    dump_cmd->add_option("--out", dump_out, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (validate_cmd->parsed())
            return cmd_validate(validate_path);
        if (run_cmd->parsed())
            return cmd_run(run_opt);
        if (trace_cmd->parsed()) {
            trace_opt.trace = true;
            return cmd_run(trace_opt);
        }
        if (dump_cmd->parsed())
            return cmd_dump_scenario(dump_path, dump_scale, dump_seed, dump_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
