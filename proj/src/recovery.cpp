#include "chainscale/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "chainscale/errors.hpp"
#include "chainscale/rng.hpp"

namespace chainscale {

void DependencyGraph::add(ModuleId source, ModuleId target) {
    edges.emplace(source, target);
    if (!acyclic()) {
        // revert and refuse
        auto range = edges.equal_range(source);
        for (auto it = range.first; it != range.second; ++it) {
            if (it->second == target) {
                edges.erase(it);
                break;
            }
        }
        throw InvariantViolation("dependency edge would create a cycle");
    }
}

std::vector<ModuleId> DependencyGraph::dependencies_of(ModuleId source) const {
    std::vector<ModuleId> out;
    auto range = edges.equal_range(source);
    for (auto it = range.first; it != range.second; ++it)
        out.push_back(it->second);
    return out;
}

bool DependencyGraph::acyclic() const {
    std::set<ModuleId> nodes;
    for (const auto& [a, b] : edges) {
        nodes.insert(a);
        nodes.insert(b);
    }
    std::map<ModuleId, int> state; // 0 unseen, 1 in-progress, 2 done
    std::vector<std::pair<ModuleId, bool>> stack;
    for (ModuleId start : nodes) {
        if (state[start] != 0)
            continue;
        stack.emplace_back(start, false);
        while (!stack.empty()) {
            auto [node, processed] = stack.back();
            stack.pop_back();
            if (processed) {
                state[node] = 2;
                continue;
            }
            if (state[node] == 1)
                continue;
            state[node] = 1;
            stack.emplace_back(node, true);
            auto range = edges.equal_range(node);
            for (auto it = range.first; it != range.second; ++it) {
                if (state[it->second] == 1)
                    return false;
                if (state[it->second] == 0)
                    stack.emplace_back(it->second, false);
            }
        }
    }
    return true;
}

DependencyGraph default_dependency_graph() {
    DependencyGraph g;
    g.add(module_market_match, module_dispute);
    g.add(module_service_payment, module_dispute);
    return g;
}

std::optional<InterruptionEvent> detect_interruption(const SidechainState& observed,
                                                     Round now_side_round, Round eta) {
    if (eta <= 0)
        throw InvalidCounts("timeout must be positive");
    if (now_side_round - observed.last_block_round >= eta) {
        InterruptionEvent ev;
        ev.sidechain_id = observed.id;
        ev.epoch = observed.epoch;
        ev.round_detected = now_side_round;
        ev.kind = InterruptionKind::DependencyStall;
        return ev;
    }
    return std::nullopt;
}

void failover(SidechainState& sc, Round) {
    if (sc.active_committee + 1 >= sc.committees.size()) {
        sc.exhausted = true;
        throw AllCommitteesExhausted("no backup committee remains for this epoch");
    }
    ++sc.active_committee;
}

void view_change(Committee& com) {
    if (com.members.empty())
        return;
    com.leader = (com.leader + 1) % com.members.size();
}

SyncTransaction mass_sync(const std::vector<SidechainState*>& module_chains, ModuleId module,
                          Epoch through_epoch, Epoch last_synced, std::uint64_t issuer_pk,
                          std::uint32_t requested_subchains) {
    std::vector<SummaryBlock> summaries;
    for (Epoch e = last_synced + 1; e <= through_epoch; ++e) {
        std::vector<const MetaBlock*> metas;
        for (const SidechainState* sc : module_chains) {
            if (sc->pruned_through >= e)
                throw MissingMetaBlocks("meta-blocks of an unsynced epoch were pruned");
            for (const MetaBlock& mb : sc->meta_blocks)
                if (mb.epoch == e)
                    metas.push_back(&mb);
        }
        summaries.push_back(produce_summary_block(module, e, metas));
    }
    return create_sync_tx(module, through_epoch, std::move(summaries), issuer_pk,
                          requested_subchains);
}

namespace {

// Sequential without-replacement draw of `draw` members from a pool of
// `pool_n` containing `pool_m` misbehaving; returns the misbehaving count and
// updates the pool.
std::int64_t draw_misbehaving(Rng& rng, std::int64_t& pool_n, std::int64_t& pool_m,
                              std::int64_t draw) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < draw; ++i) {
        const std::uint64_t pick = rng.next_below(static_cast<std::uint64_t>(pool_n));
        if (static_cast<std::int64_t>(pick) < pool_m) {
            ++hits;
            --pool_m;
        }
        --pool_n;
    }
    return hits;
}

} // namespace

RecoveryMcResult monte_carlo_recovery(const RecoveryMcParams& params) {
    if (params.runs < 1)
        throw InvalidCounts("at least one run required");
    if (params.p_lazy < 0 || params.p_malicious < 0 || params.p_lazy + params.p_malicious > 1.0)
        throw InvalidProbability("behavior fractions must be nonnegative and sum to at most 1");
    const std::int64_t n = static_cast<std::int64_t>(params.population);
    const std::int64_t committees = params.kappa + 1;
    if (committees * params.committee_size > n)
        throw InvalidCounts("population too small for kappa+1 disjoint committees");

    const std::int64_t theta = params.theta_l > 0
        ? params.theta_l
        : (params.committee_size - 2) / 3 + 1; // f+1 for a 3f+2 committee

    const std::int64_t misbehaving_total = static_cast<std::int64_t>(
        std::llround(static_cast<double>(n) * (params.p_lazy + params.p_malicious)));

    // class populations and per-class misbehaving counts (weighted mode)
    std::int64_t mu1 = n, mu2 = 0, m1 = misbehaving_total, m2 = 0;
    std::int64_t n1 = params.committee_size, n2 = 0;
    if (params.weighted) {
        if (params.classes != 2)
            throw InvalidCounts("the weighted harness models two classes");
        mu1 = n / 2;
        mu2 = n - mu1;
        m1 = static_cast<std::int64_t>(
            std::llround(params.adversary_share_class1 * static_cast<double>(misbehaving_total)));
        m1 = std::clamp<std::int64_t>(m1, std::max<std::int64_t>(0, misbehaving_total - mu2), mu1);
        m2 = misbehaving_total - m1;
        n1 = static_cast<std::int64_t>(std::llround(
            params.committee_share_class1 * static_cast<double>(params.committee_size)));
        n1 = std::clamp<std::int64_t>(n1, 0, params.committee_size);
        n2 = params.committee_size - n1;
        if (committees * n1 > mu1 || committees * n2 > mu2)
            throw InvalidCounts("class population too small for the weighted draw");
    }

    RecoveryMcResult out;
    out.step_in_minutes = params.step_in_minutes;
    out.failed_committees_per_run.reserve(params.runs);
    double total_minutes = 0.0;

    for (std::uint64_t run = 0; run < params.runs; ++run) {
        Rng rng = Rng::stream(params.seed, "recover-mc", {run});
        std::int64_t pool1_n = mu1, pool1_m = m1, pool2_n = mu2, pool2_m = m2;
        std::uint32_t failed = 0;
        bool recovered = false;
        for (std::int64_t k = 0; k < committees; ++k) {
            std::int64_t bad = draw_misbehaving(rng, pool1_n, pool1_m, n1);
            if (n2 > 0)
                bad += draw_misbehaving(rng, pool2_n, pool2_m, n2);
            if (bad < theta) {
                recovered = true;
                break;
            }
            ++failed;
        }
        out.failed_committees_per_run.push_back(failed);
        if (recovered) {
            ++out.recovered_runs;
            total_minutes += static_cast<double>(failed) * params.step_in_minutes;
        } else {
            ++out.failed_runs;
        }
    }
    out.mean_minutes = out.recovered_runs > 0
        ? total_minutes / static_cast<double>(out.recovered_runs)
        : 0.0;
    out.failure_rate =
        static_cast<double>(out.failed_runs) / static_cast<double>(params.runs);
    return out;
}

} // namespace chainscale
