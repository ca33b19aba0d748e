#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "chainscale/types.hpp"

namespace chainscale {

enum class ObsKind : std::uint8_t {
    TxConfirmed = 0,
    BlockProduced,
    SyncConfirmed,
    Pruned,
    CrossChainForward,
    CommitteeFailed,
};

const char* obs_kind_name(ObsKind k);

// BlockProduced aux_b flag bits.
constexpr std::uint64_t block_flag_empty = 0x1;
constexpr std::uint64_t block_flag_summary = 0x2;

struct Observation {
    Round round = 0; // mainchain round of the event
    ChainId chain;
    ObsKind kind = ObsKind::TxConfirmed;
    double value = 0.0;      // latency in mainchain rounds, or bytes
    std::uint64_t aux_a = 0; // tx id / tx count / epoch
    std::uint64_t aux_b = 0; // size / flags / rank
};

struct MetricsReport {
    double throughput_tx_per_round = 0.0; // confirmed within the run window
    double confirmation_time_s = 0.0;     // mean over every confirmed tx
    double storage_mb = 0.0;              // persistent bytes at end of run
    double ctr_percent = 0.0;
    double recovery_time_min = 0.0;
    std::uint64_t generated = 0;
    std::uint64_t confirmed = 0;
    std::uint64_t rejected = 0;
    std::uint64_t cross_chain_pending = 0; // measured cross-sidechain counter
    std::uint64_t forwards = 0;
    std::uint64_t committee_failures = 0;
    Round run_rounds = 0;
    Round drain_rounds = 0;
    std::vector<std::uint64_t> confirmed_per_round;     // run window only
    std::vector<std::uint64_t> storage_bytes_per_round; // total incl. live meta-blocks

    bool operator==(const MetricsReport&) const = default;
};

// Counters not derivable from the observation log; they ride alongside when
// a report is recomputed from a persisted file.
struct RunExternals {
    std::uint64_t generated = 0;
    std::uint64_t rejected = 0;
    std::uint64_t cross_chain_pending = 0;
    Round drain_rounds = 0;
    double recovery_time_min = 0.0;
};

// Append-only per-run observation log plus aggregate counters. Duplicate
// confirmation of a transaction id is an invariant violation.
class MetricsCollector {
public:
    explicit MetricsCollector(Round run_rounds, double seconds_per_round = 30.0,
                              bool keep_observations = true,
                              bool count_all_blocks_persistent = false);

    void record(const Observation& obs);

    void tx_confirmed(Round main_round, ChainId chain, TxId id, double latency_rounds,
                      std::uint32_t size_bytes);
    void block_produced(Round main_round, ChainId chain, std::uint64_t bytes,
                        std::uint64_t tx_count, bool empty_marker, bool summary_block = false);
    void sync_confirmed(Round main_round, ModuleId module, Epoch epoch);
    void pruned(Round main_round, ChainId chain, std::uint64_t bytes_freed);
    void cross_chain_forward(Round main_round, ChainId from, TxId id);
    void committee_failed(Round main_round, ChainId chain, Epoch epoch, int rank);

    void set_externals(const RunExternals& ext) { externals_ = ext; }
    RunExternals& externals() { return externals_; }

    MetricsReport aggregate() const;

    const std::vector<Observation>& observations() const { return observations_; }

    void write_observations_csv(const std::string& path, const std::string& run_id) const;
    static void write_report_csv(const std::string& path, const std::string& run_id,
                                 const MetricsReport& report);

    // Replays a persisted observation file through a fresh collector; the
    // result must equal the in-memory report exactly.
    static MetricsReport aggregate_from_csv(const std::string& path, Round run_rounds,
                                            double seconds_per_round,
                                            const RunExternals& externals,
                                            bool count_all_blocks_persistent = false);

private:
    Round run_rounds_;
    double seconds_per_round_;
    bool keep_observations_;
    bool count_all_blocks_persistent_;
    std::vector<Observation> observations_;
    std::unordered_set<TxId> confirmed_ids_;
    std::uint64_t confirmed_total_ = 0;
    std::uint64_t confirmed_in_run_ = 0;
    double latency_rounds_sum_ = 0.0;
    std::uint64_t forwards_ = 0;
    std::uint64_t committee_failures_ = 0;
    std::uint64_t persistent_bytes_ = 0;
    std::uint64_t total_bytes_ = 0; // includes live meta-blocks
    RunExternals externals_;
    std::vector<std::uint64_t> confirmed_per_round_;
    std::vector<std::uint64_t> storage_per_round_;
};

} // namespace chainscale
