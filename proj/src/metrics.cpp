#include "chainscale/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "chainscale/errors.hpp"

namespace chainscale {

const char* obs_kind_name(ObsKind k) {
    switch (k) {
    case ObsKind::TxConfirmed: return "tx_confirmed";
    case ObsKind::BlockProduced: return "block_produced";
    case ObsKind::SyncConfirmed: return "sync_confirmed";
    case ObsKind::Pruned: return "pruned";
    case ObsKind::CrossChainForward: return "forward";
    case ObsKind::CommitteeFailed: return "committee_failed";
    }
    return "?";
}

MetricsCollector::MetricsCollector(Round run_rounds, double seconds_per_round,
                                   bool keep_observations, bool count_all_blocks_persistent)
    : run_rounds_(run_rounds), seconds_per_round_(seconds_per_round),
      keep_observations_(keep_observations),
      count_all_blocks_persistent_(count_all_blocks_persistent) {
    confirmed_per_round_.assign(static_cast<std::size_t>(run_rounds), 0);
    storage_per_round_.assign(static_cast<std::size_t>(run_rounds), 0);
}

void MetricsCollector::record(const Observation& obs) {
    switch (obs.kind) {
    case ObsKind::TxConfirmed: {
        if (!confirmed_ids_.insert(obs.aux_a).second)
            throw InvariantViolation("duplicate confirmation for one transaction");
        ++confirmed_total_;
        latency_rounds_sum_ += obs.value;
        if (obs.round >= 0 && obs.round < run_rounds_) {
            ++confirmed_in_run_;
            ++confirmed_per_round_[static_cast<std::size_t>(obs.round)];
        }
        break;
    }
    case ObsKind::BlockProduced: {
        const std::uint64_t bytes = static_cast<std::uint64_t>(obs.value);
        total_bytes_ += bytes;
        const bool persistent = count_all_blocks_persistent_ || obs.chain.is_mainchain() ||
                                (obs.aux_b & block_flag_summary);
        if (persistent)
            persistent_bytes_ += bytes;
        break;
    }
    case ObsKind::Pruned:
        total_bytes_ -= static_cast<std::uint64_t>(obs.value);
        // mainchain pruning only happens on a rollback, which removes
        // otherwise-permanent blocks
        if (obs.chain.is_mainchain())
            persistent_bytes_ -= static_cast<std::uint64_t>(obs.value);
        break;
    case ObsKind::CrossChainForward:
        ++forwards_;
        break;
    case ObsKind::CommitteeFailed:
        ++committee_failures_;
        break;
    default:
        break;
    }
    if ((obs.kind == ObsKind::BlockProduced || obs.kind == ObsKind::Pruned) && obs.round >= 0 &&
        obs.round < run_rounds_)
        storage_per_round_[static_cast<std::size_t>(obs.round)] = total_bytes_;
    if (keep_observations_)
        observations_.push_back(obs);
}

void MetricsCollector::tx_confirmed(Round main_round, ChainId chain, TxId id,
                                    double latency_rounds, std::uint32_t size_bytes) {
    record(Observation{main_round, chain, ObsKind::TxConfirmed, latency_rounds, id, size_bytes});
}

void MetricsCollector::block_produced(Round main_round, ChainId chain, std::uint64_t bytes,
                                      std::uint64_t tx_count, bool empty_marker,
                                      bool summary_block) {
    std::uint64_t flags = 0;
    if (empty_marker)
        flags |= block_flag_empty;
    if (summary_block)
        flags |= block_flag_summary;
    record(Observation{main_round, chain, ObsKind::BlockProduced, static_cast<double>(bytes),
                       tx_count, flags});
}

void MetricsCollector::sync_confirmed(Round main_round, ModuleId module, Epoch epoch) {
    record(Observation{main_round, ChainId{module, 0}, ObsKind::SyncConfirmed, 0.0,
                       static_cast<std::uint64_t>(static_cast<std::uint32_t>(epoch)), 0});
}

void MetricsCollector::pruned(Round main_round, ChainId chain, std::uint64_t bytes_freed) {
    record(Observation{main_round, chain, ObsKind::Pruned, static_cast<double>(bytes_freed), 0, 0});
}

void MetricsCollector::cross_chain_forward(Round main_round, ChainId from, TxId id) {
    record(Observation{main_round, from, ObsKind::CrossChainForward, 0.0, id, 0});
}

void MetricsCollector::committee_failed(Round main_round, ChainId chain, Epoch epoch, int rank) {
    record(Observation{main_round, chain, ObsKind::CommitteeFailed, 0.0,
                       static_cast<std::uint64_t>(static_cast<std::uint32_t>(epoch)),
                       static_cast<std::uint64_t>(rank)});
}

MetricsReport MetricsCollector::aggregate() const {
    if (confirmed_total_ + externals_.rejected != externals_.generated)
        throw IncompleteRun("unconfirmed non-rejected transactions remain");
    MetricsReport r;
    r.run_rounds = run_rounds_;
    r.drain_rounds = externals_.drain_rounds;
    r.generated = externals_.generated;
    r.confirmed = confirmed_total_;
    r.rejected = externals_.rejected;
    r.cross_chain_pending = externals_.cross_chain_pending;
    r.forwards = forwards_;
    r.committee_failures = committee_failures_;
    r.throughput_tx_per_round = run_rounds_ > 0
        ? static_cast<double>(confirmed_in_run_) / static_cast<double>(run_rounds_)
        : 0.0;
    r.confirmation_time_s = confirmed_total_ > 0
        ? latency_rounds_sum_ / static_cast<double>(confirmed_total_) * seconds_per_round_
        : 0.0;
    r.storage_mb = static_cast<double>(persistent_bytes_) / 1.0e6;
    r.ctr_percent = externals_.generated > 0
        ? static_cast<double>(forwards_) / static_cast<double>(externals_.generated) * 100.0
        : 0.0;
    r.recovery_time_min = externals_.recovery_time_min;
    r.confirmed_per_round = confirmed_per_round_;
    r.storage_bytes_per_round = storage_per_round_;
    return r;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr)
            std::fclose(f);
    }
};

using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw std::runtime_error("cannot open " + path);
    return f;
}

ChainId parse_chain(const char* s) {
    if (std::strcmp(s, "main") == 0)
        return ChainId{};
    // "m<module>.<sub>"
    ChainId c;
    int module = 0, sub = 0;
    if (std::sscanf(s, "m%d.%d", &module, &sub) == 2) {
        c.module = static_cast<ModuleId>(module);
        c.sub = static_cast<std::uint16_t>(sub);
    }
    return c;
}

} // namespace

void MetricsCollector::write_observations_csv(const std::string& path,
                                              const std::string& run_id) const {
    FilePtr f = open_or_throw(path, "w");
    std::fprintf(f.get(), "# observations schema v1\n");
    std::fprintf(f.get(), "run_id,round,chain,kind,value,aux_a,aux_b\n");
    for (const auto& o : observations_) {
        std::fprintf(f.get(), "%s,%" PRId64 ",%s,%s,%.17g,%" PRIu64 ",%" PRIu64 "\n",
                     run_id.c_str(), o.round, o.chain.name().c_str(), obs_kind_name(o.kind),
                     o.value, o.aux_a, o.aux_b);
    }
}

void MetricsCollector::write_report_csv(const std::string& path, const std::string& run_id,
                                        const MetricsReport& r) {
    FilePtr f = open_or_throw(path, "w");
    std::fprintf(f.get(), "# report schema v1\n");
    std::fprintf(f.get(), "run_id,metric,value\n");
    auto row = [&](const char* key, double v) {
        std::fprintf(f.get(), "%s,%s,%.17g\n", run_id.c_str(), key, v);
    };
    auto irow = [&](const char* key, std::uint64_t v) {
        std::fprintf(f.get(), "%s,%s,%" PRIu64 "\n", run_id.c_str(), key, v);
    };
    row("throughput_tx_per_round", r.throughput_tx_per_round);
    row("throughput_tx_per_s", r.throughput_tx_per_round / 30.0);
    row("confirmation_time_s", r.confirmation_time_s);
    row("storage_mb", r.storage_mb);
    row("ctr_percent", r.ctr_percent);
    row("recovery_time_min", r.recovery_time_min);
    irow("generated", r.generated);
    irow("confirmed", r.confirmed);
    irow("rejected", r.rejected);
    irow("cross_chain_pending", r.cross_chain_pending);
    irow("forwards", r.forwards);
    irow("committee_failures", r.committee_failures);
    irow("run_rounds", static_cast<std::uint64_t>(r.run_rounds));
    irow("drain_rounds", static_cast<std::uint64_t>(r.drain_rounds));
    for (std::size_t i = 0; i < r.confirmed_per_round.size(); ++i)
        std::fprintf(f.get(), "%s,confirmed_round_%zu,%" PRIu64 "\n", run_id.c_str(), i,
                     r.confirmed_per_round[i]);
    for (std::size_t i = 0; i < r.storage_bytes_per_round.size(); ++i)
        std::fprintf(f.get(), "%s,storage_bytes_round_%zu,%" PRIu64 "\n", run_id.c_str(), i,
                     r.storage_bytes_per_round[i]);
}

MetricsReport MetricsCollector::aggregate_from_csv(const std::string& path, Round run_rounds,
                                                   double seconds_per_round,
                                                   const RunExternals& externals,
                                                   bool count_all_blocks_persistent) {
    FilePtr f = open_or_throw(path, "r");
    MetricsCollector acc(run_rounds, seconds_per_round, false, count_all_blocks_persistent);
    acc.set_externals(externals);
    char line[512];
    while (std::fgets(line, sizeof line, f.get()) != nullptr) {
        if (line[0] == '#' || std::strncmp(line, "run_id,", 7) == 0)
            continue;
        char run_id[128], chain[64], kind[64];
        long long round = 0;
        double value = 0.0;
        unsigned long long aux_a = 0, aux_b = 0;
        const int got = std::sscanf(line, "%127[^,],%lld,%63[^,],%63[^,],%lf,%llu,%llu",
                                    run_id, &round, chain, kind, &value, &aux_a, &aux_b);
        if (got != 7)
            throw MalformedEncoding("unparseable observation row");
        Observation o;
        o.round = round;
        o.chain = parse_chain(chain);
        o.value = value;
        o.aux_a = aux_a;
        o.aux_b = aux_b;
        if (std::strcmp(kind, "tx_confirmed") == 0)
            o.kind = ObsKind::TxConfirmed;
        else if (std::strcmp(kind, "block_produced") == 0)
            o.kind = ObsKind::BlockProduced;
        else if (std::strcmp(kind, "sync_confirmed") == 0)
            o.kind = ObsKind::SyncConfirmed;
        else if (std::strcmp(kind, "pruned") == 0)
            o.kind = ObsKind::Pruned;
        else if (std::strcmp(kind, "forward") == 0)
            o.kind = ObsKind::CrossChainForward;
        else if (std::strcmp(kind, "committee_failed") == 0)
            o.kind = ObsKind::CommitteeFailed;
        else
            throw MalformedEncoding("unknown observation kind");
        acc.record(o);
    }
    return acc.aggregate();
}

} // namespace chainscale
