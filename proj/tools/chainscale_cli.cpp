#include <atomic>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "chainscale/baselines.hpp"
#include "chainscale/config.hpp"
#include "chainscale/errors.hpp"
#include "chainscale/failure_math.hpp"
#include "chainscale/orchestrator.hpp"
#include "chainscale/recovery.hpp"

namespace {

using namespace chainscale;

std::string schema_footer() {
    std::ostringstream out;
    out << "Config keys (key = default): \n";
    for (const auto& doc : config_schema())
        out << "  " << doc.key << " = " << doc.default_value << "  -- " << doc.help << "\n";
    return out.str();
}

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";
};

ScenarioConfig build_config(const CommonArgs& args) {
    ScenarioConfig cfg = args.config_path.empty() ? default_config() : load_config(args.config_path);
    if (!args.config_path.empty() && cfg.name == "run") {
        cfg.name = std::filesystem::path(args.config_path).stem().string();
    }
    for (const auto& kv : args.overrides)
        apply_override(cfg, kv);
    if (args.seed_set)
        cfg.seed = args.seed;
    validate(cfg);
    return cfg;
}

std::string run_id_of(const ScenarioConfig& cfg, const std::string& suffix = "") {
    return cfg.name + suffix + "_s" + std::to_string(cfg.seed);
}

void write_outputs(const std::string& out_dir, const std::string& run_id,
                   const MetricsReport& report, MetricsCollector* collector,
                   Simulation* sim, bool export_ledger) {
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/";
    MetricsCollector::write_report_csv(base + "report_" + run_id + ".csv", run_id, report);
    if (collector != nullptr && !collector->observations().empty())
        collector->write_observations_csv(base + "observations_" + run_id + ".csv", run_id);
    if (sim != nullptr && export_ledger)
        sim->export_ledger_csv(base + "ledger_" + run_id + ".csv");
}

void print_report(const std::string& run_id, const MetricsReport& r) {
    std::printf("run %s\n", run_id.c_str());
    std::printf("  throughput      %.2f tx/round (%.2f tx/s)\n", r.throughput_tx_per_round,
                r.throughput_tx_per_round / 30.0);
    std::printf("  confirmation    %.2f s\n", r.confirmation_time_s);
    std::printf("  storage         %.3f MB\n", r.storage_mb);
    std::printf("  ctr             %.2f %%\n", r.ctr_percent);
    std::printf("  generated       %llu (confirmed %llu, rejected %llu)\n",
                static_cast<unsigned long long>(r.generated),
                static_cast<unsigned long long>(r.confirmed),
                static_cast<unsigned long long>(r.rejected));
    std::printf("  cross-pending   %llu\n",
                static_cast<unsigned long long>(r.cross_chain_pending));
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stod(item));
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stoll(item));
    return out;
}

int cmd_run(const CommonArgs& args, bool keep_observations, bool export_ledger) {
    ScenarioConfig cfg = build_config(args);
    Simulation sim(cfg, Simulation::Options{false, keep_observations, true});
    const MetricsReport report = sim.run();
    const std::string run_id = run_id_of(cfg);
    write_outputs(args.out_dir, run_id, report, &sim.metrics(), &sim, export_ledger);
    print_report(run_id, report);
    return 0;
}

int cmd_baseline(const CommonArgs& args, const std::string& system, std::uint32_t shards,
                 bool keep_observations) {
    ScenarioConfig cfg = build_config(args);
    if (system == "single") {
        Simulation sim(cfg, Simulation::Options{true, keep_observations, true});
        const MetricsReport report = sim.run();
        const std::string run_id = run_id_of(cfg, "_single");
        write_outputs(args.out_dir, run_id, report, &sim.metrics(), nullptr, false);
        print_report(run_id, report);
        return 0;
    }
    if (system == "sharded") {
        if (shards > 0)
            cfg.num_shards = shards;
        ShardedMarket market(cfg, cfg.num_shards);
        const MetricsReport report = market.run();
        const std::string run_id = run_id_of(cfg, "_sharded" + std::to_string(cfg.num_shards));
        write_outputs(args.out_dir, run_id, report, &market.metrics(), nullptr, false);
        print_report(run_id, report);
        return 0;
    }
    throw ConfigError("baseline --system must be 'single' or 'sharded'");
}

int cmd_sweep(const CommonArgs& args, const std::vector<std::string>& params,
              unsigned jobs, bool keep_observations) {
    // cartesian product over every --param key=v1,v2,...
    struct Axis {
        std::string key;
        std::vector<std::string> values;
    };
    std::vector<Axis> axes;
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos)
            throw ConfigError("sweep --param must be key=v1,v2,...");
        Axis axis;
        axis.key = p.substr(0, eq);
        std::stringstream ss(p.substr(eq + 1));
        std::string v;
        while (std::getline(ss, v, ','))
            axis.values.push_back(v);
        if (axis.values.empty())
            throw ConfigError("sweep --param has no values: " + p);
        axes.push_back(std::move(axis));
    }
    if (axes.empty())
        throw ConfigError("sweep requires at least one --param");

    std::vector<std::vector<std::string>> points{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& point : points) {
            for (const auto& v : axis.values) {
                auto ext = point;
                ext.push_back(axis.key + "=" + v);
                next.push_back(std::move(ext));
            }
        }
        points = std::move(next);
    }

    std::vector<std::thread> pool;
    std::atomic<std::size_t> cursor{0};
    std::atomic<int> failures{0};
    const unsigned workers = std::max(1u, jobs);
    auto work = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= points.size())
                return;
            try {
                ScenarioConfig cfg = build_config(args);
                std::string suffix;
                for (const auto& kv : points[i]) {
                    apply_override(cfg, kv);
                    std::string tag = kv;
                    for (char& ch : tag)
                        if (ch == '=' || ch == ',' || ch == '/')
                            ch = '-';
                    suffix += "_" + tag;
                }
                validate(cfg);
                Simulation sim(cfg, Simulation::Options{false, keep_observations, true});
                const MetricsReport report = sim.run();
                const std::string run_id = run_id_of(cfg, suffix);
                write_outputs(args.out_dir, run_id, report, &sim.metrics(), nullptr, false);
                print_report(run_id, report);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "sweep point failed: %s\n", e.what());
                failures.fetch_add(1);
            }
        }
    };
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(work);
    for (auto& t : pool)
        t.join();
    return failures.load() == 0 ? 0 : 1;
}

int cmd_analyze(std::int64_t committee_size, std::int64_t theta, std::int64_t population,
                double p_rate, const std::string& class_p, const std::string& quotas,
                int kappa, std::int64_t sidechains, double target, const std::string& csv) {
    if (theta <= 0)
        theta = (committee_size - 2) / 3 + 1;
    const std::int64_t misbehaving =
        static_cast<std::int64_t>(static_cast<double>(population) * p_rate);

    std::vector<std::pair<std::string, double>> rows;
    rows.emplace_back("binomial_failure",
                      committee_failure_weighted({committee_size}, {p_rate}, theta));
    rows.emplace_back("hypergeometric_failure",
                      committee_failure_exact_hypergeometric(population, {misbehaving},
                                                             {committee_size}, theta));
    if (!class_p.empty()) {
        const auto rates = parse_double_list(class_p);
        std::vector<std::int64_t> counts;
        if (!quotas.empty()) {
            counts = parse_int_list(quotas);
            if (counts.size() != rates.size())
                throw ConfigError("--quotas and --class-p must list the same class count");
        } else {
            counts.assign(rates.size(),
                          committee_size / static_cast<std::int64_t>(rates.size()));
            counts[0] += committee_size - counts[0] * static_cast<std::int64_t>(rates.size());
        }
        rows.emplace_back("weighted_failure", committee_failure_weighted(counts, rates, theta));
        if (target > 0) {
            const auto derived = derive_quotas(rates, committee_size, target, theta);
            std::string text;
            for (std::size_t i = 0; i < derived.size(); ++i)
                text += (i == 0 ? "" : "/") + std::to_string(derived[i]);
            std::printf("derived_quotas %s (failure %.6e)\n", text.c_str(),
                        committee_failure_weighted(derived, rates, theta));
        }
    }
    const double af =
        autorecovery_failure(population, misbehaving, committee_size, kappa, theta);
    rows.emplace_back("autorecovery_failure", af);
    rows.emplace_back("union_bound", chainscale_autorecovery_bound(sidechains, af));

    for (const auto& [k, v] : rows)
        std::printf("%-24s %.9e\n", k.c_str(), v);
    if (!csv.empty()) {
        std::FILE* f = std::fopen(csv.c_str(), "w");
        if (f == nullptr)
            throw std::runtime_error("cannot open " + csv);
        std::fprintf(f, "metric,value\n");
        for (const auto& [k, v] : rows)
            std::fprintf(f, "%s,%.17g\n", k.c_str(), v);
        std::fclose(f);
    }
    return 0;
}

int cmd_recover_mc(const RecoveryMcParams& params, const std::string& csv) {
    const RecoveryMcResult res = monte_carlo_recovery(params);
    std::printf("runs            %llu\n", static_cast<unsigned long long>(params.runs));
    std::printf("mean_recovery   %.4f min\n", res.mean_minutes);
    std::printf("failure_rate    %.6f\n", res.failure_rate);
    std::printf("recovered_runs  %llu\n", static_cast<unsigned long long>(res.recovered_runs));
    if (!csv.empty()) {
        std::FILE* f = std::fopen(csv.c_str(), "w");
        if (f == nullptr)
            throw std::runtime_error("cannot open " + csv);
        std::fprintf(f, "run,failed_committees,recovered,minutes\n");
        for (std::size_t i = 0; i < res.failed_committees_per_run.size(); ++i) {
            const std::uint32_t failed = res.failed_committees_per_run[i];
            const bool ok = failed <= static_cast<std::uint32_t>(params.kappa);
            std::fprintf(f, "%zu,%u,%d,%.4f\n", i, failed, ok ? 1 : 0,
                         ok ? failed * params.step_in_minutes : -1.0);
        }
        std::fclose(f);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chainscale: module-sidechain market simulator and committee analytics"};
    app.require_subcommand(1);
    app.footer(schema_footer());

    CommonArgs common;
    bool keep_observations = false;
    bool export_ledger = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "scenario config file");
        cmd->add_option("--override", common.overrides, "config override key=value")
            ->take_all();
        cmd->add_option_function<std::uint64_t>(
               "--seed",
               [&](std::uint64_t v) {
                   common.seed = v;
                   common.seed_set = true;
               },
               "seed override");
        cmd->add_option("--out", common.out_dir, "output directory");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "full market experiment");
    add_common(run_cmd);
    run_cmd->add_flag("--keep-observations", keep_observations,
                      "write the raw observation log");
    run_cmd->add_flag("--export-ledger", export_ledger, "write a per-block ledger snapshot");

    CLI::App* baseline_cmd = app.add_subcommand("baseline", "comparison systems");
    add_common(baseline_cmd);
    std::string system = "single";
    std::uint32_t shards = 0;
    baseline_cmd->add_option("--system", system, "single | sharded")->required();
    baseline_cmd->add_option("--shards", shards, "shard count for the sharded baseline");
    baseline_cmd->add_flag("--keep-observations", keep_observations,
                           "write the raw observation log");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a family of experiments");
    add_common(sweep_cmd);
    std::vector<std::string> sweep_params;
    unsigned jobs = 1;
    sweep_cmd->add_option("--param", sweep_params, "sweep axis key=v1,v2,...")->take_all();
    sweep_cmd->add_option("--jobs", jobs, "parallel sweep points");

    CLI::App* analyze_cmd = app.add_subcommand("analyze", "committee failure calculators");
    std::int64_t a_committee = 747, a_theta = 0, a_population = 1000000, a_sidechains = 4;
    double a_p = 0.25, a_target = 0.0;
    int a_kappa = 1;
    std::string a_class_p, a_quotas, a_csv;
    analyze_cmd->add_option("--committee-size", a_committee, "committee size");
    analyze_cmd->add_option("--theta", a_theta, "liveness threshold (0: derive f+1)");
    analyze_cmd->add_option("--population", a_population, "miner population");
    analyze_cmd->add_option("--p", a_p, "population misbehavior rate");
    analyze_cmd->add_option("--class-p", a_class_p, "per-class rates, e.g. 0.15,0.25,0.35");
    analyze_cmd->add_option("--quotas", a_quotas, "per-class committee counts");
    analyze_cmd->add_option("--kappa", a_kappa, "backup committees");
    analyze_cmd->add_option("--sidechains", a_sidechains, "sidechain count for the union bound");
    analyze_cmd->add_option("--target", a_target, "derive quotas for this failure target");
    analyze_cmd->add_option("--csv", a_csv, "write the table to a CSV file");

    CLI::App* mc_cmd = app.add_subcommand("recover-mc", "autorecovery Monte Carlo");
    RecoveryMcParams mc;
    std::string mc_election = "random";
    std::string mc_csv;
    mc_cmd->add_option("--population", mc.population, "miner population");
    mc_cmd->add_option("--p-lazy", mc.p_lazy, "lazy fraction");
    mc_cmd->add_option("--p-malicious", mc.p_malicious, "malicious fraction");
    mc_cmd->add_option("--committee-size", mc.committee_size, "committee size");
    mc_cmd->add_option("--backups", mc.kappa, "backup committees (kappa)");
    mc_cmd->add_option("--theta", mc.theta_l, "liveness threshold (0: derive f+1)");
    mc_cmd->add_option("--election", mc_election, "random | weighted");
    mc_cmd->add_option("--class-share", mc.committee_share_class1,
                       "committee share from class 1 (weighted)");
    mc_cmd->add_option("--adv-share", mc.adversary_share_class1,
                       "misbehaving share living in class 1 (weighted)");
    mc_cmd->add_option("--step-in", mc.step_in_minutes, "step-in minutes per failover");
    mc_cmd->add_option("--runs", mc.runs, "Monte Carlo runs");
    mc_cmd->add_option("--seed", mc.seed, "seed");
    mc_cmd->add_option("--csv", mc_csv, "per-run recovery times CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(common, keep_observations, export_ledger);
        if (baseline_cmd->parsed())
            return cmd_baseline(common, system, shards, keep_observations);
        if (sweep_cmd->parsed())
            return cmd_sweep(common, sweep_params, jobs, keep_observations);
        if (analyze_cmd->parsed())
            return cmd_analyze(a_committee, a_theta, a_population, a_p, a_class_p, a_quotas,
                               a_kappa, a_sidechains, a_target, a_csv);
        if (mc_cmd->parsed()) {
            mc.weighted = mc_election == "weighted";
            if (!mc.weighted && mc_election != "random")
                throw ConfigError("recover-mc --election must be 'random' or 'weighted'");
            return cmd_recover_mc(mc, mc_csv);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
    return 0;
}
