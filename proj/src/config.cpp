#include "chainscale/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <cmath>

#include "chainscale/codec.hpp"
#include "chainscale/errors.hpp"

namespace chainscale {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

std::string strip_quotes(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

struct Field {
    std::string default_value;
    std::string help;
    std::function<void(ScenarioConfig&, const std::string&)> set;
};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const std::string v = trim(value);
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t pos = 0;
            out = static_cast<T>(std::stod(v, &pos));
            if (pos != v.size())
                throw std::invalid_argument(v);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not a number: " + v);
        }
    } else {
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
            throw ConfigError("config key '" + key + "': not an integer: " + v);
    }
    return out;
}

const std::map<std::string, Field>& field_table() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        auto add = [&](const std::string& key, const std::string& def, const std::string& help,
                       std::function<void(ScenarioConfig&, const std::string&)> set) {
            t.emplace(key, Field{def, help, std::move(set)});
        };
        add("seed", "1", "run seed; every stream derives from it",
            [](ScenarioConfig& c, const std::string& v) {
                c.seed = parse_number<std::uint64_t>("seed", v);
            });
        add("name", "run", "run identifier used in output file names",
            [](ScenarioConfig& c, const std::string& v) { c.name = strip_quotes(trim(v)); });
        add("num_miners", "8000", "miner population size",
            [](ScenarioConfig& c, const std::string& v) {
                c.num_miners = parse_number<std::uint32_t>("num_miners", v);
            });
        add("p_lazy", "0", "fraction of lazy miners",
            [](ScenarioConfig& c, const std::string& v) {
                c.p_lazy = parse_number<double>("p_lazy", v);
            });
        add("p_malicious", "0", "fraction of malicious miners",
            [](ScenarioConfig& c, const std::string& v) {
                c.p_malicious = parse_number<double>("p_malicious", v);
            });
        add("election_mode", "random", "committee election: random | weighted",
            [](ScenarioConfig& c, const std::string& v) {
                const std::string m = strip_quotes(trim(v));
                if (m == "random")
                    c.election_mode = ElectionMode::Random;
                else if (m == "weighted")
                    c.election_mode = ElectionMode::Weighted;
                else
                    throw ConfigError("config key 'election_mode': unknown mode " + m);
            });
        add("classes", "3", "score classes for weighted election",
            [](ScenarioConfig& c, const std::string& v) {
                c.classes = parse_number<int>("classes", v);
            });
        add("score_alpha", "0.5", "weight of mining power in the miner score",
            [](ScenarioConfig& c, const std::string& v) {
                c.score_alpha = parse_number<double>("score_alpha", v);
            });
        add("score_beta", "0.3", "weight of consensus participation in the miner score",
            [](ScenarioConfig& c, const std::string& v) {
                c.score_beta = parse_number<double>("score_beta", v);
            });
        add("score_gamma", "0.2", "weight of dispute involvement in the miner score",
            [](ScenarioConfig& c, const std::string& v) {
                c.score_gamma = parse_number<double>("score_gamma", v);
            });
        add("critical_top_share", "0.6", "class-1 share of the dispute committee (weighted mode)",
            [](ScenarioConfig& c, const std::string& v) {
                c.critical_top_share = parse_number<double>("critical_top_share", v);
            });
        add("committee_size", "500", "sidechain committee size (3f+2)",
            [](ScenarioConfig& c, const std::string& v) {
                c.committee_size = parse_number<std::int64_t>("committee_size", v);
            });
        add("backups", "1", "backup committees per sidechain (kappa)",
            [](ScenarioConfig& c, const std::string& v) {
                c.backups = parse_number<int>("backups", v);
            });
        add("theta_l", "0", "liveness threshold; 0 derives f+1 from the committee size",
            [](ScenarioConfig& c, const std::string& v) {
                c.theta_l = parse_number<std::int64_t>("theta_l", v);
            });
        add("epoch_rounds", "10", "mainchain rounds per epoch (omega)",
            [](ScenarioConfig& c, const std::string& v) {
                c.epoch_rounds = parse_number<Round>("epoch_rounds", v);
            });
        add("side_rounds_per_main", "3", "sidechain rounds per mainchain round (rho)",
            [](ScenarioConfig& c, const std::string& v) {
                c.side_rounds_per_main = parse_number<Round>("side_rounds_per_main", v);
            });
        add("main_block_bytes", "1000000", "mainchain block capacity",
            [](ScenarioConfig& c, const std::string& v) {
                c.main_block_bytes = parse_number<std::uint64_t>("main_block_bytes", v);
            });
        add("side_block_bytes", "1000000", "sidechain block capacity",
            [](ScenarioConfig& c, const std::string& v) {
                c.side_block_bytes = parse_number<std::uint64_t>("side_block_bytes", v);
            });
        add("run_rounds", "61", "mainchain rounds with fresh traffic",
            [](ScenarioConfig& c, const std::string& v) {
                c.run_rounds = parse_number<Round>("run_rounds", v);
            });
        add("seconds_per_round", "30", "simulated seconds per mainchain round",
            [](ScenarioConfig& c, const std::string& v) {
                c.seconds_per_round = parse_number<double>("seconds_per_round", v);
            });
        add("sync_confirm_depth", "1", "mainchain blocks before a sync-transaction confirms",
            [](ScenarioConfig& c, const std::string& v) {
                c.sync_confirm_depth = parse_number<int>("sync_confirm_depth", v);
            });
        add("contracts", "64000", "service contracts in the market",
            [](ScenarioConfig& c, const std::string& v) {
                c.contracts = parse_number<std::uint64_t>("contracts", v);
            });
        add("dispute_rate", "0.10", "fraction of active contracts disputed per epoch",
            [](ScenarioConfig& c, const std::string& v) {
                c.dispute_rate = parse_number<double>("dispute_rate", v);
            });
        add("transfer_ratio", "0.020408163265306121", "transfers per service transaction",
            [](ScenarioConfig& c, const std::string& v) {
                c.transfer_ratio = parse_number<double>("transfer_ratio", v);
            });
        add("price_per_round", "1", "service price per active round",
            [](ScenarioConfig& c, const std::string& v) {
                c.price_per_round = parse_number<Money>("price_per_round", v);
            });
        add("negotiation_mu", "3", "mean negotiation length, rounds",
            [](ScenarioConfig& c, const std::string& v) {
                c.negotiation_mu = parse_number<double>("negotiation_mu", v);
            });
        add("negotiation_sigma", "1", "negotiation length standard deviation",
            [](ScenarioConfig& c, const std::string& v) {
                c.negotiation_sigma = parse_number<double>("negotiation_sigma", v);
            });
        add("negotiation_clamp_max", "10", "upper clamp on negotiation length",
            [](ScenarioConfig& c, const std::string& v) {
                c.negotiation_clamp_max = parse_number<Round>("negotiation_clamp_max", v);
            });
        add("negotiation_msgs_per_round", "2", "asks+offers emitted per negotiating round",
            [](ScenarioConfig& c, const std::string& v) {
                c.negotiation_msgs_per_round = parse_number<int>("negotiation_msgs_per_round", v);
            });
        add("duration_min", "5", "shortest initial contract duration, rounds",
            [](ScenarioConfig& c, const std::string& v) {
                c.duration_min = parse_number<Round>("duration_min", v);
            });
        add("duration_max", "15", "longest initial contract duration, rounds",
            [](ScenarioConfig& c, const std::string& v) {
                c.duration_max = parse_number<Round>("duration_max", v);
            });
        add("size_ask", "150", "ask transaction bytes",
            [](ScenarioConfig& c, const std::string& v) {
                c.size_ask = parse_number<std::uint32_t>("size_ask", v);
            });
        add("size_offer", "150", "offer transaction bytes",
            [](ScenarioConfig& c, const std::string& v) {
                c.size_offer = parse_number<std::uint32_t>("size_offer", v);
            });
        add("size_agreement", "716", "contract-deal transaction bytes",
            [](ScenarioConfig& c, const std::string& v) {
                c.size_agreement = parse_number<std::uint32_t>("size_agreement", v);
            });
        add("size_proof", "200", "retrievability proof transaction bytes",
            [](ScenarioConfig& c, const std::string& v) {
                c.size_proof = parse_number<std::uint32_t>("size_proof", v);
            });
        add("size_payment", "120", "service payment transaction bytes",
            [](ScenarioConfig& c, const std::string& v) {
                c.size_payment = parse_number<std::uint32_t>("size_payment", v);
            });
        add("size_dispute", "515", "dispute transaction bytes",
            [](ScenarioConfig& c, const std::string& v) {
                c.size_dispute = parse_number<std::uint32_t>("size_dispute", v);
            });
        add("size_transfer", "100", "currency transfer transaction bytes",
            [](ScenarioConfig& c, const std::string& v) {
                c.size_transfer = parse_number<std::uint32_t>("size_transfer", v);
            });
        add("sync_base_bytes", "1024", "sync-transaction base size",
            [](ScenarioConfig& c, const std::string& v) {
                c.sync_base_bytes = parse_number<std::uint64_t>("sync_base_bytes", v);
            });
        add("sync_per_entry_bytes", "32", "sync-transaction bytes per summary entry",
            [](ScenarioConfig& c, const std::string& v) {
                c.sync_per_entry_bytes = parse_number<std::uint64_t>("sync_per_entry_bytes", v);
            });
        add("aPbMcD", "1P1M1D", "sub-sidechain caps: payment, match, dispute",
            [](ScenarioConfig& c, const std::string& v) {
                c.apbmcd = strip_quotes(trim(v));
                parse_apbmcd(c);
            });
        add("eta_rounds", "2", "silence timeout before a dependency stall is declared",
            [](ScenarioConfig& c, const std::string& v) {
                c.eta_rounds = parse_number<Round>("eta_rounds", v);
            });
        add("step_in_minutes", "5", "backup committee step-in time, minutes",
            [](ScenarioConfig& c, const std::string& v) {
                c.step_in_minutes = parse_number<double>("step_in_minutes", v);
            });
        add("adversary_strategy", "invalid_at_last_round",
            "withhold | invalid_at_last_round | invalid_immediately",
            [](ScenarioConfig& c, const std::string& v) {
                const std::string m = strip_quotes(trim(v));
                if (m == "withhold")
                    c.adversary_strategy = AdversaryStrategy::WithholdVotes;
                else if (m == "invalid_at_last_round")
                    c.adversary_strategy = AdversaryStrategy::InvalidAtLastRound;
                else if (m == "invalid_immediately")
                    c.adversary_strategy = AdversaryStrategy::InvalidImmediately;
                else
                    throw ConfigError("config key 'adversary_strategy': unknown value " + m);
            });
        add("dependencies", "match:dispute,pay:dispute",
            "liveness dependencies, source:target pairs",
            [](ScenarioConfig& c, const std::string& v) {
                c.dependencies = strip_quotes(trim(v));
            });
        add("script", "", "scripted events, e.g. fail:module=3,epoch=1;rollback:round=25,depth=2",
            [](ScenarioConfig& c, const std::string& v) {
                c.script = strip_quotes(trim(v));
            });
        add("num_shards", "4", "shards in the sharded baseline",
            [](ScenarioConfig& c, const std::string& v) {
                c.num_shards = parse_number<std::uint32_t>("num_shards", v);
            });
        return t;
    }();
    return table;
}

ScriptedEvent parse_event(const std::string& text) {
    ScriptedEvent ev;
    const auto colon = text.find(':');
    const std::string head = trim(colon == std::string::npos ? text : text.substr(0, colon));
    if (head == "fail")
        ev.kind = ScriptedEvent::Kind::CommitteeFailure;
    else if (head == "leader")
        ev.kind = ScriptedEvent::Kind::LeaderFailure;
    else if (head == "rollback")
        ev.kind = ScriptedEvent::Kind::Rollback;
    else
        throw ConfigError("config key 'script': unknown event kind '" + head + "'");
    if (colon == std::string::npos)
        return ev;
    std::stringstream args(text.substr(colon + 1));
    std::string kv;
    while (std::getline(args, kv, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config key 'script': expected key=value in '" + kv + "'");
        const std::string k = trim(kv.substr(0, eq));
        const std::string v = trim(kv.substr(eq + 1));
        if (k == "module")
            ev.module = static_cast<ModuleId>(parse_number<int>("script.module", v));
        else if (k == "epoch")
            ev.epoch = parse_number<Epoch>("script.epoch", v);
        else if (k == "round")
            ev.round = parse_number<Round>("script.round", v);
        else if (k == "depth")
            ev.depth = parse_number<int>("script.depth", v);
        else if (k == "committees")
            ev.committees = parse_number<int>("script.committees", v);
        else
            throw ConfigError("config key 'script': unknown argument '" + k + "'");
    }
    return ev;
}

void parse_script(ScenarioConfig& cfg) {
    cfg.scripted_events.clear();
    if (cfg.script.empty())
        return;
    std::stringstream ss(cfg.script);
    std::string ev;
    while (std::getline(ss, ev, ';')) {
        const std::string t = trim(ev);
        if (!t.empty())
            cfg.scripted_events.push_back(parse_event(t));
    }
}

} // namespace

void parse_apbmcd(ScenarioConfig& cfg) {
    unsigned a = 0, b = 0, c = 0;
    if (std::sscanf(cfg.apbmcd.c_str(), "%uP%uM%uD", &a, &b, &c) != 3 || a == 0 || b == 0 ||
        c == 0)
        throw ConfigError("config key 'aPbMcD': expected a value like 3P1M1D, got '" +
                          cfg.apbmcd + "'");
    cfg.cap_payment = a;
    cfg.cap_match = b;
    cfg.cap_dispute = c;
}

ScenarioConfig default_config() {
    return ScenarioConfig{};
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    ScenarioConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == '[')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto& table = field_table();
        auto it = table.find(key);
        if (it == table.end())
            throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown config key '" +
                              key + "'");
        it->second.set(cfg, value);
    }
    parse_script(cfg);
    validate(cfg);
    return cfg;
}

void apply_override(ScenarioConfig& cfg, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value: " + key_value);
    const std::string key = trim(key_value.substr(0, eq));
    const std::string value = trim(key_value.substr(eq + 1));
    const auto& table = field_table();
    auto it = table.find(key);
    if (it == table.end())
        throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, value);
    parse_script(cfg);
}

std::vector<ConfigKeyDoc> config_schema() {
    std::vector<ConfigKeyDoc> out;
    for (const auto& [key, field] : field_table())
        out.push_back(ConfigKeyDoc{key, field.default_value, field.help});
    return out;
}

void validate(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("config key '" + field + "': " + why);
    };
    if (cfg.num_miners == 0)
        fail("num_miners", "must be positive");
    if (cfg.p_lazy < 0 || cfg.p_malicious < 0 || cfg.p_lazy + cfg.p_malicious > 1.0)
        fail("p_lazy/p_malicious", "fractions must be nonnegative and sum to at most 1");
    if (cfg.classes < 1)
        fail("classes", "at least one class");
    if (cfg.score_alpha < 0 || cfg.score_beta < 0 || cfg.score_gamma < 0 ||
        std::abs(cfg.score_alpha + cfg.score_beta + cfg.score_gamma - 1.0) > 1e-12)
        fail("score_alpha/score_beta/score_gamma", "weights must be nonnegative and sum to 1");
    if (cfg.committee_size < 2)
        fail("committee_size", "too small for a 3f+2 committee");
    if (cfg.backups < 0)
        fail("backups", "must be nonnegative");
    if (cfg.epoch_rounds < 1)
        fail("epoch_rounds", "must be positive");
    if (cfg.side_rounds_per_main < 1)
        fail("side_rounds_per_main", "must be positive");
    if (cfg.run_rounds < 1)
        fail("run_rounds", "must be positive");
    if (cfg.main_block_bytes < tx_header_bytes ||
        cfg.side_block_bytes < tx_header_bytes)
        fail("main_block_bytes/side_block_bytes", "smaller than one transaction");
    if (cfg.duration_min < 1 || cfg.duration_max < cfg.duration_min)
        fail("duration_min/duration_max", "need 1 <= min <= max");
    if (cfg.negotiation_msgs_per_round < 0)
        fail("negotiation_msgs_per_round", "must be nonnegative");
    if (cfg.sync_confirm_depth < 1)
        fail("sync_confirm_depth", "must be at least 1");
    for (std::uint32_t s :
         {cfg.size_ask, cfg.size_offer, cfg.size_agreement, cfg.size_proof, cfg.size_payment,
          cfg.size_dispute})
        if (s < tx_header_bytes || s > cfg.side_block_bytes)
            fail("size_*", "service transaction size outside [header, side_block_bytes]");
    if (cfg.size_transfer < tx_header_bytes || cfg.size_transfer > cfg.main_block_bytes)
        fail("size_transfer", "transfer size outside [header, main_block_bytes]");
    if (cfg.eta_rounds < 1)
        fail("eta_rounds", "timeout must be positive");
    if (cfg.num_shards < 1)
        fail("num_shards", "must be at least 1");
    // full backup provisioning across all chains
    const std::uint64_t chains =
        static_cast<std::uint64_t>(cfg.cap_payment) + cfg.cap_match + cfg.cap_dispute;
    const std::uint64_t demand = static_cast<std::uint64_t>(cfg.backups + 1) *
                                 static_cast<std::uint64_t>(cfg.committee_size) * chains;
    if (demand > cfg.num_miners)
        fail("num_miners", "(backups+1) * committee_size * chains exceeds the population");
}

} // namespace chainscale
