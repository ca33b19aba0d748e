#pragma once

#include <stdexcept>
#include <string>

namespace chainscale {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedEncoding : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownPrefix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnassignedType : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadModuleTable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidWeights : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyPopulation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuotaInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidProbability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidCounts : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConsensusFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSummary : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PruneBeforeConfirm : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoCapacity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllCommitteesExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingMetaBlocks : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IncompleteRun : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal invariant violations map to process exit code 2.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace chainscale
