#include "gridwise/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridwise {

namespace {

using json = nlohmann::ordered_json;

json params_to_json(const SimParams& p) {
    json j;
    j["bins"] = p.gnm.bins;
    j["bin_method"] = p.gnm.bin_method == rs::BinMethod::EqualFrequency ? "equal_frequency"
                                                                        : "equal_width";
    j["k_neighbors"] = p.gnm.k_neighbors;
    j["predicted_fail_threshold"] = p.gnm.predicted_fail_threshold;
    j["rsa_new_fraction"] = p.gnm.rsa_new_fraction;
    j["rsa_min_interval_s"] = p.gnm.rsa_min_interval_s;
    j["dtr_jitter"] = p.gnm.dtr_jitter;
    j["burst_slowdown"] = p.gnm.burst_slowdown;
    j["burst_cpu_load"] = p.gnm.burst_cpu_load;
    j["queue_ref_len"] = p.gnm.queue_ref_len;
    j["optimistic_prior"] = p.gnm.optimistic_prior;
    j["nominal_size_mi"] = p.gnm.nominal_size_mi;
    j["nominal_deadline_s"] = p.gnm.nominal_deadline_s;
    j["dependability_width"] = p.build.dependability_width;
    j["alpha_band"] = {p.build.alpha_lo, p.build.alpha_hi};
    j["price_tolerance_p"] = p.build.price_tolerance_p;
    j["dtr_band"] = {p.build.dtr_lo, p.build.dtr_hi};
    j["ram_band_mb"] = {p.build.ram_lo_mb, p.build.ram_hi_mb};
    j["local_cpu_band"] = {p.build.local_cpu_lo, p.build.local_cpu_hi};
    j["local_ram_frac_band"] = {p.build.local_ram_frac_lo, p.build.local_ram_frac_hi};
    j["warmup_depth"] = p.warmup.depth;
    j["warmup_size_band_mi"] = {p.warmup.size_lo_mi, p.warmup.size_hi_mi};
    j["warmup_deadline_band_s"] = {p.warmup.deadline_lo_s, p.warmup.deadline_hi_s};
    j["warmup_memory_band_mb"] = {p.warmup.memory_lo_mb, p.warmup.memory_hi_mb};
    j["burst_mean_interval_s"] = p.bursts.mean_interval_s;
    j["burst_duration_band_s"] = {p.bursts.min_duration_s, p.bursts.max_duration_s};
    j["round_period_s"] = p.round_period_s;
    j["announce_period_s"] = p.announce_period_s;
    j["rsa_tick_period_s"] = p.rsa_tick_period_s;
    j["cancel_job_on_giveup"] = p.cancel_job_on_giveup;
    j["submit_at_s"] = p.submit_at_s;
    j["horizon_margin_s"] = p.horizon_margin_s;
    return j;
}

void band_from_json(const json& j, double& lo, double& hi, const std::string& key) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("scenario: '" + key + "' must be a [lo, hi] pair");
    lo = j[0].get<double>();
    hi = j[1].get<double>();
}

SimParams params_from_json(const json& j) {
    SimParams p;
    static const std::set<std::string> known = {
        "bins", "bin_method", "k_neighbors", "predicted_fail_threshold", "rsa_new_fraction",
        "rsa_min_interval_s", "dtr_jitter", "burst_slowdown", "burst_cpu_load", "queue_ref_len",
        "optimistic_prior", "nominal_size_mi", "nominal_deadline_s", "dependability_width",
        "alpha_band", "price_tolerance_p", "dtr_band", "ram_band_mb", "local_cpu_band",
        "local_ram_frac_band", "warmup_depth", "warmup_size_band_mi", "warmup_deadline_band_s",
        "warmup_memory_band_mb", "burst_mean_interval_s", "burst_duration_band_s",
        "round_period_s", "announce_period_s", "rsa_tick_period_s", "cancel_job_on_giveup",
        "submit_at_s", "horizon_margin_s"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key))
            throw std::invalid_argument("scenario: unknown params key '" + key + "'");
    }

    if (j.contains("bins")) p.gnm.bins = j["bins"].get<int>();
    if (j.contains("bin_method")) {
        const std::string m = j["bin_method"].get<std::string>();
        if (m == "equal_frequency") p.gnm.bin_method = rs::BinMethod::EqualFrequency;
        else if (m == "equal_width") p.gnm.bin_method = rs::BinMethod::EqualWidth;
        else throw std::invalid_argument("scenario: unknown bin_method '" + m + "'");
    }
    if (j.contains("k_neighbors")) p.gnm.k_neighbors = j["k_neighbors"].get<int>();
    if (j.contains("predicted_fail_threshold"))
        p.gnm.predicted_fail_threshold = j["predicted_fail_threshold"].get<double>();
    if (j.contains("rsa_new_fraction")) p.gnm.rsa_new_fraction = j["rsa_new_fraction"].get<double>();
    if (j.contains("rsa_min_interval_s"))
        p.gnm.rsa_min_interval_s = j["rsa_min_interval_s"].get<double>();
    if (j.contains("dtr_jitter")) p.gnm.dtr_jitter = j["dtr_jitter"].get<double>();
    if (j.contains("burst_slowdown")) p.gnm.burst_slowdown = j["burst_slowdown"].get<double>();
    if (j.contains("burst_cpu_load")) p.gnm.burst_cpu_load = j["burst_cpu_load"].get<double>();
    if (j.contains("queue_ref_len")) p.gnm.queue_ref_len = j["queue_ref_len"].get<double>();
    if (j.contains("optimistic_prior")) p.gnm.optimistic_prior = j["optimistic_prior"].get<bool>();
    if (j.contains("nominal_size_mi")) p.gnm.nominal_size_mi = j["nominal_size_mi"].get<double>();
    if (j.contains("nominal_deadline_s"))
        p.gnm.nominal_deadline_s = j["nominal_deadline_s"].get<double>();
    if (j.contains("dependability_width"))
        p.build.dependability_width = j["dependability_width"].get<double>();
    if (j.contains("alpha_band")) band_from_json(j["alpha_band"], p.build.alpha_lo, p.build.alpha_hi, "alpha_band");
    if (j.contains("price_tolerance_p"))
        p.build.price_tolerance_p = j["price_tolerance_p"].get<double>();
    if (j.contains("dtr_band")) band_from_json(j["dtr_band"], p.build.dtr_lo, p.build.dtr_hi, "dtr_band");
    if (j.contains("ram_band_mb"))
        band_from_json(j["ram_band_mb"], p.build.ram_lo_mb, p.build.ram_hi_mb, "ram_band_mb");
    if (j.contains("local_cpu_band"))
        band_from_json(j["local_cpu_band"], p.build.local_cpu_lo, p.build.local_cpu_hi, "local_cpu_band");
    if (j.contains("local_ram_frac_band"))
        band_from_json(j["local_ram_frac_band"], p.build.local_ram_frac_lo,
                       p.build.local_ram_frac_hi, "local_ram_frac_band");
    if (j.contains("warmup_depth")) p.warmup.depth = j["warmup_depth"].get<int>();
    if (j.contains("warmup_size_band_mi"))
        band_from_json(j["warmup_size_band_mi"], p.warmup.size_lo_mi, p.warmup.size_hi_mi,
                       "warmup_size_band_mi");
    if (j.contains("warmup_deadline_band_s"))
        band_from_json(j["warmup_deadline_band_s"], p.warmup.deadline_lo_s, p.warmup.deadline_hi_s,
                       "warmup_deadline_band_s");
    if (j.contains("warmup_memory_band_mb"))
        band_from_json(j["warmup_memory_band_mb"], p.warmup.memory_lo_mb, p.warmup.memory_hi_mb,
                       "warmup_memory_band_mb");
    if (j.contains("burst_mean_interval_s"))
        p.bursts.mean_interval_s = j["burst_mean_interval_s"].get<double>();
    if (j.contains("burst_duration_band_s"))
        band_from_json(j["burst_duration_band_s"], p.bursts.min_duration_s,
                       p.bursts.max_duration_s, "burst_duration_band_s");
    if (j.contains("round_period_s")) p.round_period_s = j["round_period_s"].get<double>();
    if (j.contains("announce_period_s")) p.announce_period_s = j["announce_period_s"].get<double>();
    if (j.contains("rsa_tick_period_s")) p.rsa_tick_period_s = j["rsa_tick_period_s"].get<double>();
    if (j.contains("cancel_job_on_giveup"))
        p.cancel_job_on_giveup = j["cancel_job_on_giveup"].get<bool>();
    if (j.contains("submit_at_s")) p.submit_at_s = j["submit_at_s"].get<double>();
    if (j.contains("horizon_margin_s")) p.horizon_margin_s = j["horizon_margin_s"].get<double>();
    return p;
}

} // namespace

std::string scenario_to_string(const ScenarioConfig& cfg) {
    json j;
    j["local_schedulers"] = json::array();
    for (const auto& ls : cfg.local_schedulers) {
        json row;
        row["ls_id"] = ls.ls_id;
        row["node_count"] = ls.node_count;
        row["gmips"] = ls.gmips;
        row["queue_deadline_status_s"] = ls.queue_deadline_status_s;
        row["medium_dependability"] = ls.medium_dependability;
        j["local_schedulers"].push_back(std::move(row));
    }
    j["job_groups"] = json::array();
    for (const auto& jg : cfg.job_groups) {
        json row;
        row["name"] = jg.name;
        row["job_count"] = jg.job_count;
        row["total_tasks"] = jg.total_tasks;
        row["deadline_s"] = jg.deadline_s;
        row["memory_mb"] = jg.memory_mb;
        row["length_mi"] = jg.length_mi;
        row["reliability_weight"] = jg.reliability_weight;
        row["completion_weight"] = jg.completion_weight;
        j["job_groups"].push_back(std::move(row));
    }
    j["params"] = params_to_json(cfg.params);
    return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("scenario: JSON parse error: ") + e.what());
    }

    static const std::set<std::string> known_top = {"local_schedulers", "job_groups", "params"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known_top.count(key))
            throw std::invalid_argument("scenario: unknown key '" + key + "'");
    }

    ScenarioConfig cfg;
    static const std::set<std::string> known_ls = {"ls_id", "node_count", "gmips",
                                                   "queue_deadline_status_s", "medium_dependability"};
    for (const auto& row : j.value("local_schedulers", json::array())) {
        for (const auto& [key, value] : row.items()) {
            (void)value;
            if (!known_ls.count(key))
                throw std::invalid_argument("scenario: unknown local_schedulers key '" + key + "'");
        }
        LocalSchedulerSpec ls;
        ls.ls_id = row.value("ls_id", "");
        ls.node_count = row.value("node_count", 0);
        ls.gmips = row.value("gmips", 0.0);
        ls.queue_deadline_status_s = row.value("queue_deadline_status_s", 0.0);
        ls.medium_dependability = row.value("medium_dependability", 1.0);
        cfg.local_schedulers.push_back(std::move(ls));
    }
    static const std::set<std::string> known_jg = {"name",      "job_count", "total_tasks",
                                                   "deadline_s", "memory_mb", "length_mi",
                                                   "reliability_weight", "completion_weight"};
    for (const auto& row : j.value("job_groups", json::array())) {
        for (const auto& [key, value] : row.items()) {
            (void)value;
            if (!known_jg.count(key))
                throw std::invalid_argument("scenario: unknown job_groups key '" + key + "'");
        }
        JobGroupSpec jg;
        jg.name = row.value("name", "");
        jg.job_count = row.value("job_count", 0);
        jg.total_tasks = row.value("total_tasks", 0);
        jg.deadline_s = row.value("deadline_s", 0.0);
        jg.memory_mb = row.value("memory_mb", 0.0);
        jg.length_mi = row.value("length_mi", 0.0);
        jg.reliability_weight = row.value("reliability_weight", 0.0);
        jg.completion_weight = row.value("completion_weight", 0.0);
        cfg.job_groups.push_back(std::move(jg));
    }
    if (j.contains("params"))
        cfg.params = params_from_json(j["params"]);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_string(buf.str());
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::invalid_argument("cannot write scenario file: " + path);
    out << scenario_to_string(cfg);
}

std::vector<Violation> validate(const ScenarioConfig& cfg) {
    auto v = validate_scenario(cfg.local_schedulers, cfg.job_groups);
    const SimParams& p = cfg.params;
    auto add = [&](bool ok, const char* path, const char* msg) {
        if (!ok)
            v.push_back({path, msg});
    };
    add(p.gnm.bins >= 2, "params.bins", "must be >= 2");
    add(p.gnm.k_neighbors >= 1, "params.k_neighbors", "must be >= 1");
    add(p.build.price_tolerance_p >= 0 && p.build.price_tolerance_p <= 0.5,
        "params.price_tolerance_p", "must be in [0, 0.5]");
    add(p.gnm.burst_slowdown >= 0 && p.gnm.burst_slowdown <= 1, "params.burst_slowdown",
        "must be in [0, 1]");
    add(p.gnm.dtr_jitter >= 0 && p.gnm.dtr_jitter < 1, "params.dtr_jitter", "must be in [0, 1)");
    add(p.round_period_s > 0, "params.round_period_s", "must be > 0");
    add(p.warmup.depth >= 0, "params.warmup_depth", "must be >= 0");
    add(p.build.alpha_lo > 0 && p.build.alpha_hi >= p.build.alpha_lo, "params.alpha_band",
        "must be a positive ascending pair");
    add(p.build.dtr_lo > 0 && p.build.dtr_hi >= p.build.dtr_lo, "params.dtr_band",
        "must be a positive ascending pair");
    return v;
}

ScenarioConfig scaled(const ScenarioConfig& cfg, double factor) {
    if (factor <= 0)
        throw std::invalid_argument("scale factor must be > 0");
    ScenarioConfig out = cfg;
    for (auto& ls : out.local_schedulers)
        ls.node_count = std::max(1, static_cast<int>(std::llround(ls.node_count * factor)));
    for (auto& jg : out.job_groups) {
        jg.total_tasks = std::max(1, static_cast<int>(std::llround(jg.total_tasks * factor)));
        jg.job_count = std::min(jg.job_count, jg.total_tasks);
    }
    return out;
}

ScenarioConfig reference_scenario() {
    ScenarioConfig cfg;
    cfg.local_schedulers = {
        {"LS1", 400, 65, 460, 0.72},
        {"LS2", 320, 140, 350, 0.93},
        {"LS3", 750, 80, 400, 0.85},
    };
    cfg.job_groups = {
        {"Job_Group1", 5, 250, 1200, 1.93, 45500, 0.8, 0.2},
        {"Job_Group2", 3, 210, 2100, 3.4, 72000, 0.3, 0.7},
        {"Job_Group3", 5, 100, 900, 6.25, 30000, 0.5, 0.5},
    };
    return cfg;
}

} // namespace gridwise
