#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chainscale/types.hpp"

namespace chainscale {

enum class ElectionMode : std::uint8_t {
    Random = 0,
    Weighted,
};

enum class AdversaryStrategy : std::uint8_t {
    WithholdVotes = 0,
    InvalidAtLastRound,
    InvalidImmediately,
};

struct ScriptedEvent {
    enum class Kind : std::uint8_t {
        CommitteeFailure = 0, // primary committee of (module, epoch) withholds
        LeaderFailure,        // leader silent at (module, epoch, round)
        Rollback,             // mainchain drops `depth` blocks at `round`
    };
    Kind kind = Kind::CommitteeFailure;
    ModuleId module = 0;
    Epoch epoch = 0;
    Round round = 0;
    int depth = 0;
    int committees = 1; // committee failures: how many in rank order fail
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::string name = "run";

    // population
    std::uint32_t num_miners = 8000;
    double p_lazy = 0.0;
    double p_malicious = 0.0;

    // election
    ElectionMode election_mode = ElectionMode::Random;
    int classes = 3;
    double score_alpha = 0.5;
    double score_beta = 0.3;
    double score_gamma = 0.2;
    double critical_top_share = 0.6; // class-1 share for the dispute committee
    std::int64_t committee_size = 500;
    int backups = 1; // kappa
    std::int64_t theta_l = 0; // 0: derive f+1 from committee size

    // rounds and blocks
    Round epoch_rounds = 10;      // omega, mainchain rounds per epoch
    Round side_rounds_per_main = 3; // rho
    std::uint64_t main_block_bytes = 1000000;
    std::uint64_t side_block_bytes = 1000000;
    Round run_rounds = 61;
    double seconds_per_round = 30.0;
    int sync_confirm_depth = 1;

    // traffic
    std::uint64_t contracts = 64000;
    double dispute_rate = 0.10;
    double transfer_ratio = 2.0 / 98.0;
    Money price_per_round = 1;
    double negotiation_mu = 3.0;
    double negotiation_sigma = 1.0;
    Round negotiation_clamp_max = 10;
    int negotiation_msgs_per_round = 2;
    Round duration_min = 5;
    Round duration_max = 15;
    std::uint32_t size_ask = 150;
    std::uint32_t size_offer = 150;
    std::uint32_t size_agreement = 716;
    std::uint32_t size_proof = 200;
    std::uint32_t size_payment = 120;
    std::uint32_t size_dispute = 515;
    std::uint32_t size_transfer = 100;
    std::uint64_t sync_base_bytes = 1024;
    std::uint64_t sync_per_entry_bytes = 32;

    // sub-sidechain caps, aPbMcD: a payment chains, b match chains, c dispute
    std::string apbmcd = "1P1M1D";
    std::uint32_t cap_payment = 1;
    std::uint32_t cap_match = 1;
    std::uint32_t cap_dispute = 1;

    // recovery
    Round eta_rounds = 2;
    double step_in_minutes = 5.0;
    AdversaryStrategy adversary_strategy = AdversaryStrategy::InvalidAtLastRound;
    std::string dependencies = "match:dispute,pay:dispute";
    std::string script; // e.g. "fail:module=3,epoch=1;rollback:round=25,depth=2"

    // baselines
    std::uint32_t num_shards = 4;

    std::vector<ScriptedEvent> scripted_events; // parsed from `script`

    Round side_rounds_per_epoch() const { return epoch_rounds * side_rounds_per_main; }
    std::int64_t derived_theta() const {
        return theta_l > 0 ? theta_l : (committee_size - 2) / 3 + 1;
    }
};

// Flat `key = value` file; '#' comments and [section] headers are ignored.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig default_config();

// Applies one "key=value" override; throws ConfigError naming the key.
void apply_override(ScenarioConfig& cfg, const std::string& key_value);

// All keys with defaults and one-line help, for --help and the docs.
struct ConfigKeyDoc {
    std::string key;
    std::string default_value;
    std::string help;
};
std::vector<ConfigKeyDoc> config_schema();

// Throws ConfigError naming the violated constraint.
void validate(const ScenarioConfig& cfg);

// Parses "3P1M1D" into the three caps.
void parse_apbmcd(ScenarioConfig& cfg);

} // namespace chainscale
