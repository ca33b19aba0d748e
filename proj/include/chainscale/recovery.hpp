#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "chainscale/chains.hpp"
#include "chainscale/types.hpp"

namespace chainscale {

enum class InterruptionKind : std::uint8_t {
    CommitteeFailure = 0,
    LeaderFailure,
    MainchainRollback,
    DependencyStall,
};

struct InterruptionEvent {
    ChainId sidechain_id;
    Epoch epoch = 0;
    Round round_detected = 0;
    InterruptionKind kind = InterruptionKind::CommitteeFailure;
    int rollback_depth = 0;
};

// source gates on target's liveness
struct DependencyGraph {
    std::multimap<ModuleId, ModuleId> edges;

    void add(ModuleId source, ModuleId target);
    std::vector<ModuleId> dependencies_of(ModuleId source) const;
    bool acyclic() const;
};

DependencyGraph default_dependency_graph(); // match -> dispute, pay -> dispute

// No new block on a depended-upon sidechain for eta rounds -> stall.
std::optional<InterruptionEvent> detect_interruption(const SidechainState& observed,
                                                     Round now_side_round, Round eta);

// Advances to the next backup committee. Throws AllCommitteesExhausted when
// none remain; the epoch is then lost and the event feeds the Pr[AF] metric.
void failover(SidechainState& sc, Round now_side_round);

// Leader rotation after a silent or invalid proposal; consumes one round.
void view_change(Committee& com);

// One sync-transaction covering the current epoch and every unsynced prior
// epoch, summaries recomputed per epoch from the retained meta-blocks.
SyncTransaction mass_sync(const std::vector<SidechainState*>& module_chains, ModuleId module,
                          Epoch through_epoch, Epoch last_synced, std::uint64_t issuer_pk,
                          std::uint32_t requested_subchains);

// Monte Carlo autorecovery harness: committees drawn disjointly, a committee
// fails when its misbehaving members reach theta_l, recovery time counts the
// failed committees before the first success.
struct RecoveryMcParams {
    std::uint64_t population = 1000000;
    double p_lazy = 0.25;
    double p_malicious = 0.25;
    std::int64_t committee_size = 10000;
    int kappa = 3;
    std::int64_t theta_l = 0; // 0: derive f+1 from the committee size
    bool weighted = false;
    int classes = 2;
    double committee_share_class1 = 0.6;  // W60
    double adversary_share_class1 = 0.15; // A15
    double step_in_minutes = 5.0;
    std::uint64_t runs = 10000;
    std::uint64_t seed = 1;
};

struct RecoveryMcResult {
    double mean_minutes = 0.0;     // over recovered runs
    double failure_rate = 0.0;     // all committees failed
    std::uint64_t recovered_runs = 0;
    std::uint64_t failed_runs = 0;
    std::vector<std::uint32_t> failed_committees_per_run; // kappa+1 == all failed
    double step_in_minutes = 5.0;
};

RecoveryMcResult monte_carlo_recovery(const RecoveryMcParams& params);

} // namespace chainscale
