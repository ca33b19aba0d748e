#pragma once

#include <cstdint>
#include <vector>

namespace chainscale {

// Analytic committee-failure calculators. A committee "fails" when the count
// of misbehaving members reaches the liveness threshold theta_l, i.e. the
// failure probability is the upper tail Pr(X >= theta_l) of the total
// misbehaving-member count X across the per-class draws.

// Distribution of X when each class contributes n[i] members drawn with
// per-member misbehavior rate p[i] (independent binomials, convolved).
std::vector<double> misbehaving_distribution_weighted(const std::vector<std::int64_t>& n,
                                                      const std::vector<double>& p);

// Same, sampling without replacement: each class has population mu of which
// m[i] misbehave, and n[i] members are drawn.
std::vector<double> misbehaving_distribution_hypergeometric(std::int64_t mu,
                                                            const std::vector<std::int64_t>& m,
                                                            const std::vector<std::int64_t>& n);

double committee_failure_weighted(const std::vector<std::int64_t>& n,
                                  const std::vector<double>& p,
                                  std::int64_t theta_l);

double committee_failure_exact_hypergeometric(std::int64_t mu,
                                              const std::vector<std::int64_t>& m,
                                              const std::vector<std::int64_t>& n,
                                              std::int64_t theta_l);

// Probability that the primary committee and all kappa backups fail, with the
// kappa+1 committees of size committee_size drawn disjointly from a
// population of n_total containing m_misbehaving. Coefficients of the
// generating polynomial (sum_{i=theta_l}^{S} C(S,i) y^i)^(kappa+1) are
// extracted by polynomial self-multiplication in extended-exponent floats.
double autorecovery_failure(std::int64_t n_total,
                            std::int64_t m_misbehaving,
                            std::int64_t committee_size,
                            std::int64_t kappa,
                            std::int64_t theta_l);

// Union bound over k sidechains, capped at 1.
double chainscale_autorecovery_bound(std::int64_t k, double per_sidechain_failure);

// Smallest-failure committee composition (summing to committee_size) whose
// weighted failure probability meets target_failure, found by greedy
// reallocation from the highest-rate class toward the lowest-rate class.
// max_per_class < 0 means unbounded. Throws Infeasible when even the best
// composition misses the target.
std::vector<std::int64_t> derive_quotas(const std::vector<double>& p,
                                        std::int64_t committee_size,
                                        double target_failure,
                                        std::int64_t theta_l,
                                        std::int64_t max_per_class = -1);

} // namespace chainscale
