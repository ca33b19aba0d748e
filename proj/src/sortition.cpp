#include "chainscale/sortition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chainscale/errors.hpp"

namespace chainscale {

MinerPopulation MinerPopulation::create(std::uint32_t count, std::uint64_t seed, double p_lazy,
                                        double p_malicious) {
    MinerPopulation pop;
    pop.records_.resize(count);
    pop.keys_.reserve(count);
    Rng rng = Rng::stream(seed, "miners");
    for (std::uint32_t i = 0; i < count; ++i) {
        MinerRecord& r = pop.records_[i];
        pop.keys_.emplace_back(digest64("miner-sk", {seed, i}));
        r.pk = pop.keys_.back().pk();
        r.mining_power = std::max(0.0, rng.next_normal(100.0, 25.0));
        r.participation = 0;
        r.disputes = rng.next_below(4) == 0 ? rng.next_below(3) : 0;
        const double u = rng.next_unit();
        if (u < p_malicious)
            r.behavior = MinerBehavior::Malicious;
        else if (u < p_malicious + p_lazy)
            r.behavior = MinerBehavior::Lazy;
        else
            r.behavior = MinerBehavior::Honest;
        pop.pk_index_.emplace(r.pk, i);
    }
    return pop;
}

void MinerPopulation::recompute_scores(const ScoreWeights& w) {
    for (auto& r : records_)
        r.score = compute_score(r, w);
}

std::vector<std::int64_t> MinerPopulation::assign_classes(int class_count) {
    if (records_.empty())
        throw EmptyPopulation("no miners");
    std::vector<MinerIndex> order(records_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](MinerIndex a, MinerIndex b) {
        if (records_[a].score != records_[b].score)
            return records_[a].score > records_[b].score;
        return records_[a].pk < records_[b].pk;
    });
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(class_count), 0);
    const std::int64_t n = static_cast<std::int64_t>(records_.size());
    for (std::int64_t rank = 1; rank <= n; ++rank) {
        const int k = class_of_rank(rank, n, class_count);
        records_[order[static_cast<std::size_t>(rank - 1)]].klass = k;
        ++sizes[static_cast<std::size_t>(k - 1)];
    }
    return sizes;
}

std::vector<std::pair<double, std::uint64_t>> MinerPopulation::public_scores() const {
    std::vector<std::pair<double, std::uint64_t>> s;
    s.reserve(records_.size());
    for (const auto& r : records_)
        s.emplace_back(r.score, r.pk);
    return s;
}

MinerIndex MinerPopulation::index_of_pk(std::uint64_t pk) const {
    auto it = pk_index_.find(pk);
    if (it == pk_index_.end())
        throw InvariantViolation("unknown miner pk");
    return it->second;
}

EpochCommittees run_epoch_election(MinerPopulation& pop, const ClassQuota& per_committee,
                                   int kappa, int class_count, std::uint64_t seed1,
                                   std::uint64_t seed2) {
    const auto class_sizes = pop.assign_classes(class_count);
    const auto scores = pop.public_scores();

    // quotas inflated to seat the primary and all backup committees
    ClassQuota draw = per_committee;
    for (auto& row : draw.needed)
        for (auto& v : row)
            v *= (kappa + 1);

    for (int c = 1; c <= class_count; ++c) {
        if (draw.class_total(c) > class_sizes[static_cast<std::size_t>(c - 1)])
            throw QuotaInfeasible("per-class demand exceeds class population");
    }

    // local sortition for every miner, publicly verified before seating
    struct Seat {
        std::uint64_t pk;
        MinerIndex idx;
    };
    std::map<ChainId, std::vector<std::vector<Seat>>> elected; // chain -> class -> seats
    for (const auto& chain : draw.chains)
        elected[chain].resize(static_cast<std::size_t>(class_count));

    std::vector<std::vector<Seat>> unassigned(static_cast<std::size_t>(class_count));
    for (MinerIndex i = 0; i < pop.size(); ++i) {
        const MinerRecord& r = pop.records()[i];
        const auto result =
            elect(seed1, seed2, pop.key(i), r.score, r.klass,
                  class_sizes[static_cast<std::size_t>(r.klass - 1)], draw);
        const bool ok = verify_election(result, seed1, seed2, scores, class_count,
                                        class_sizes[static_cast<std::size_t>(r.klass - 1)], draw);
        if (ok && result.elected && result.assignment) {
            elected[*result.assignment][static_cast<std::size_t>(r.klass - 1)].push_back(
                Seat{r.pk, i});
        } else {
            unassigned[static_cast<std::size_t>(r.klass - 1)].push_back(Seat{r.pk, i});
        }
    }

    auto by_pk = [](const Seat& a, const Seat& b) { return a.pk < b.pk; };
    for (auto& seats : unassigned)
        std::sort(seats.begin(), seats.end(), by_pk);

    // trim overfull cells back to the pool, then backfill short cells, both
    // in ascending pk order so the outcome is independent of arrival order
    for (std::size_t ci = 0; ci < draw.chains.size(); ++ci) {
        auto& cells = elected[draw.chains[ci]];
        for (int c = 1; c <= class_count; ++c) {
            auto& cell = cells[static_cast<std::size_t>(c - 1)];
            std::sort(cell.begin(), cell.end(), by_pk);
            const std::size_t need =
                static_cast<std::size_t>(draw.needed[ci][static_cast<std::size_t>(c - 1)]);
            if (cell.size() > need) {
                auto& pool = unassigned[static_cast<std::size_t>(c - 1)];
                pool.insert(pool.end(), cell.begin() + static_cast<std::ptrdiff_t>(need),
                            cell.end());
                std::sort(pool.begin(), pool.end(), by_pk);
                cell.resize(need);
            }
        }
    }
    for (std::size_t ci = 0; ci < draw.chains.size(); ++ci) {
        auto& cells = elected[draw.chains[ci]];
        for (int c = 1; c <= class_count; ++c) {
            auto& cell = cells[static_cast<std::size_t>(c - 1)];
            const std::size_t need =
                static_cast<std::size_t>(draw.needed[ci][static_cast<std::size_t>(c - 1)]);
            auto& pool = unassigned[static_cast<std::size_t>(c - 1)];
            while (cell.size() < need) {
                if (pool.empty())
                    throw QuotaInfeasible("backfill pool exhausted");
                cell.push_back(pool.front());
                pool.erase(pool.begin());
            }
        }
    }

    // slice each chain's per-class seats into kappa+1 committees
    EpochCommittees out;
    for (std::size_t ci = 0; ci < per_committee.chains.size(); ++ci) {
        const ChainId chain = per_committee.chains[ci];
        std::vector<Committee> committees(static_cast<std::size_t>(kappa + 1));
        for (int k = 0; k <= kappa; ++k) {
            Committee& com = committees[static_cast<std::size_t>(k)];
            com.sidechain_id = chain;
            com.role = k == 0 ? CommitteeRole::Primary : CommitteeRole::Backup;
            com.backup_rank = k;
            com.leader = 0;
        }
        for (int c = 1; c <= class_count; ++c) {
            const auto& cell = elected[chain][static_cast<std::size_t>(c - 1)];
            const std::size_t per =
                static_cast<std::size_t>(per_committee.needed[ci][static_cast<std::size_t>(c - 1)]);
            for (int k = 0; k <= kappa; ++k)
                for (std::size_t j = 0; j < per; ++j)
                    committees[static_cast<std::size_t>(k)].members.push_back(
                        cell[static_cast<std::size_t>(k) * per + j].idx);
        }
        out.by_chain.emplace(chain, std::move(committees));
    }
    return out;
}

std::vector<std::int64_t> balanced_composition(std::int64_t committee_size, int class_count) {
    std::vector<std::int64_t> n(static_cast<std::size_t>(class_count),
                                committee_size / class_count);
    std::int64_t rem = committee_size % class_count;
    for (std::size_t i = 0; i < n.size() && rem > 0; ++i, --rem)
        ++n[i];
    return n;
}

std::vector<std::int64_t> plurality_composition(std::int64_t committee_size, int class_count,
                                                double top_share) {
    if (class_count == 1)
        return {committee_size};
    std::vector<std::int64_t> n(static_cast<std::size_t>(class_count), 0);
    n[0] = std::min<std::int64_t>(
        committee_size,
        static_cast<std::int64_t>(std::llround(top_share * static_cast<double>(committee_size))));
    const std::int64_t rest = committee_size - n[0];
    const std::int64_t lower = class_count - 1;
    for (int c = 1; c < class_count; ++c)
        n[static_cast<std::size_t>(c)] = rest / lower;
    std::int64_t rem = rest % lower;
    for (int c = 1; c < class_count && rem > 0; ++c, --rem)
        ++n[static_cast<std::size_t>(c)];
    return n;
}

Committee elect_sync_committee(const std::vector<Committee>& sub_committees,
                               const MinerPopulation& pop, std::size_t size, Rng& rng) {
    if (sub_committees.empty())
        throw InvalidCounts("sync committee needs at least one sub-committee");
    if (sub_committees.size() == 1) {
        Committee c = sub_committees.front();
        c.role = CommitteeRole::SyncCommittee;
        return c;
    }
    const int class_count = [&] {
        int top = 1;
        for (const auto& sc : sub_committees)
            for (MinerIndex m : sc.members)
                top = std::max(top, pop.records()[m].klass);
        return top;
    }();

    std::vector<std::vector<MinerIndex>> union_by_class(static_cast<std::size_t>(class_count));
    for (const auto& sc : sub_committees)
        for (MinerIndex m : sc.members)
            union_by_class[static_cast<std::size_t>(pop.records()[m].klass - 1)].push_back(m);

    const std::size_t total = [&] {
        std::size_t t = 0;
        for (const auto& v : union_by_class)
            t += v.size();
        return t;
    }();
    if (size > total)
        size = total;

    // largest-remainder apportionment of the aggregate class shares
    std::vector<std::size_t> want(union_by_class.size(), 0);
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < union_by_class.size(); ++c) {
        const double exact = static_cast<double>(union_by_class[c].size()) *
                             static_cast<double>(size) / static_cast<double>(total);
        want[c] = static_cast<std::size_t>(exact);
        assigned += want[c];
        rema.emplace_back(exact - static_cast<double>(want[c]), c);
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < size && i < rema.size(); ++i, ++assigned)
        ++want[rema[i].second];

    Committee out;
    out.sidechain_id = sub_committees.front().sidechain_id;
    out.sidechain_id.sub = 0;
    out.role = CommitteeRole::SyncCommittee;
    for (std::size_t c = 0; c < union_by_class.size(); ++c) {
        auto& pool = union_by_class[c];
        std::sort(pool.begin(), pool.end());
        const std::size_t k = std::min(want[c], pool.size());
        for (std::uint32_t pick : rng.sample_indices(static_cast<std::uint32_t>(pool.size()),
                                                     static_cast<std::uint32_t>(k)))
            out.members.push_back(pool[pick]);
    }
    out.leader = 0;
    return out;
}

} // namespace chainscale
