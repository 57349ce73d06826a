#include "gridwise/config.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace gridwise;

TEST_CASE("serialize/parse round-trip is byte-identical") {
    const ScenarioConfig cfg = reference_scenario();
    const std::string once = scenario_to_string(cfg);
    const std::string twice = scenario_to_string(scenario_from_string(once));
    CHECK(once == twice);
}

TEST_CASE("the bundled scenario file is in canonical form: load/save is bit-exact") {
    const std::string path = std::string(GRIDWISE_SOURCE_DIR) + "/paper-tables.cfg";
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    CHECK(scenario_to_string(load_scenario(path)) == bytes);
}

TEST_CASE("parsed values mirror the field names") {
    const std::string text = scenario_to_string(reference_scenario());
    const ScenarioConfig cfg = scenario_from_string(text);
    REQUIRE(cfg.local_schedulers.size() == 3);
    CHECK(cfg.local_schedulers[0].ls_id == "LS1");
    CHECK(cfg.local_schedulers[0].node_count == 400);
    CHECK(cfg.local_schedulers[1].gmips == 140);
    CHECK(cfg.local_schedulers[2].medium_dependability == 0.85);
    REQUIRE(cfg.job_groups.size() == 3);
    CHECK(cfg.job_groups[0].length_mi == 45500);
    CHECK(cfg.job_groups[1].deadline_s == 2100);
    CHECK(cfg.job_groups[2].memory_mb == 6.25);
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(scenario_from_string(R"({"nope": 1})"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_string(R"({"params": {"made_up": 1}})"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_string(R"({"local_schedulers": [{"nodecount": 3}]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_string("not json"), std::invalid_argument);
}

TEST_CASE("validate flags a bad scenario through the config layer") {
    ScenarioConfig cfg = reference_scenario();
    cfg.local_schedulers[0].medium_dependability = 1.2;
    const auto v = validate(cfg);
    REQUIRE(!v.empty());
    CHECK(v[0].path == "local_schedulers[0].medium_dependability");

    cfg = reference_scenario();
    cfg.params.gnm.bins = 1;
    CHECK(!validate(cfg).empty());

    CHECK(validate(reference_scenario()).empty());
}

TEST_CASE("scaling shrinks nodes and tasks proportionally") {
    const ScenarioConfig cfg = scaled(reference_scenario(), 0.1);
    CHECK(cfg.local_schedulers[0].node_count == 40);
    CHECK(cfg.local_schedulers[1].node_count == 32);
    CHECK(cfg.local_schedulers[2].node_count == 75);
    CHECK(cfg.job_groups[0].total_tasks == 25);
    CHECK(cfg.job_groups[1].total_tasks == 21);
    CHECK(cfg.job_groups[2].total_tasks == 10);
    // job counts survive but never exceed the task count
    CHECK(cfg.job_groups[0].job_count == 5);
    CHECK(cfg.job_groups[2].job_count == 5);

    const ScenarioConfig tiny = scaled(reference_scenario(), 0.001);
    for (const auto& jg : tiny.job_groups) {
        CHECK(jg.total_tasks >= 1);
        CHECK(jg.job_count <= jg.total_tasks);
    }
    CHECK_THROWS_AS(scaled(reference_scenario(), 0.0), std::invalid_argument);
}

TEST_CASE("defaults apply for a minimal scenario") {
    const auto cfg = scenario_from_string(R"({
        "local_schedulers": [{"ls_id": "A", "node_count": 2, "gmips": 50,
                              "queue_deadline_status_s": 0, "medium_dependability": 1.0}],
        "job_groups": [{"name": "G", "job_count": 1, "total_tasks": 2, "deadline_s": 600,
                        "memory_mb": 1.0, "length_mi": 1000,
                        "reliability_weight": 0.5, "completion_weight": 0.5}]
    })");
    CHECK(cfg.params.gnm.bins == 3);
    CHECK(cfg.params.gnm.k_neighbors == 5);
    CHECK(cfg.params.round_period_s == 30);
    CHECK(validate(cfg).empty());
}
