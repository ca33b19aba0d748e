#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "chainscale/config.hpp"
#include "chainscale/errors.hpp"

using namespace chainscale;

TEST_CASE("defaults describe the full-scale scenario") {
    const ScenarioConfig cfg = default_config();
    CHECK(cfg.num_miners == 8000);
    CHECK(cfg.contracts == 64000);
    CHECK(cfg.committee_size == 500);
    CHECK(cfg.epoch_rounds == 10);
    CHECK(cfg.side_rounds_per_main == 3);
    CHECK(cfg.run_rounds == 61);
    CHECK(cfg.main_block_bytes == 1000000);
    CHECK(cfg.size_dispute == 515);
    CHECK(cfg.size_agreement == 716);
    CHECK(cfg.dispute_rate == doctest::Approx(0.10));
    CHECK(cfg.step_in_minutes == doctest::Approx(5.0));
    CHECK(cfg.derived_theta() == (500 - 2) / 3 + 1);
    validate(cfg);
}

TEST_CASE("config files parse with comments and sections") {
    const std::string path = "/tmp/chainscale_cfg_test.toml";
    {
        std::ofstream out(path);
        out << "# comment\n[scenario]\nname = \"demo\"\nnum_miners = 400\n";
        out << "contracts = 100\ncommittee_size = 20\naPbMcD = \"2P1M1D\"\n";
        out << "script = \"rollback:round=5,depth=1\"\n";
    }
    const ScenarioConfig cfg = load_config(path);
    CHECK(cfg.name == "demo");
    CHECK(cfg.num_miners == 400);
    CHECK(cfg.cap_payment == 2);
    CHECK(cfg.cap_match == 1);
    REQUIRE(cfg.scripted_events.size() == 1);
    CHECK(cfg.scripted_events[0].kind == ScriptedEvent::Kind::Rollback);
    CHECK(cfg.scripted_events[0].round == 5);
    CHECK(cfg.scripted_events[0].depth == 1);
    std::remove(path.c_str());
}

TEST_CASE("unknown keys and malformed values name the offender") {
    ScenarioConfig cfg = default_config();
    CHECK_THROWS_WITH_AS(apply_override(cfg, "no_such_key=1"),
                         doctest::Contains("no_such_key"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_override(cfg, "num_miners=abc"),
                         doctest::Contains("num_miners"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "aPbMcD=banana"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "election_mode=quadratic"), ConfigError);

    apply_override(cfg, "aPbMcD=3P2M1D");
    CHECK(cfg.cap_payment == 3);
    CHECK(cfg.cap_match == 2);
    CHECK(cfg.cap_dispute == 1);
}

TEST_CASE("validation names the violated constraint") {
    ScenarioConfig cfg = default_config();
    cfg.score_alpha = 0.9; // weights no longer sum to 1
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("score_alpha"), ConfigError);

    cfg = default_config();
    cfg.num_miners = 10; // cannot seat the committees
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("num_miners"), ConfigError);

    cfg = default_config();
    cfg.duration_max = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("the schema lists every key with a default") {
    const auto schema = config_schema();
    CHECK(schema.size() >= 30);
    bool found_apbmcd = false;
    for (const auto& doc : schema) {
        CHECK_FALSE(doc.key.empty());
        CHECK_FALSE(doc.help.empty());
        found_apbmcd = found_apbmcd || doc.key == "aPbMcD";
    }
    CHECK(found_apbmcd);
}
