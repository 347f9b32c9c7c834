#pragma once

#include <stdexcept>
#include <string>

namespace mfd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct AllNodesCoincide : Error {
    using Error::Error;
};
struct OrderTooLow : Error {
    using Error::Error;
};
struct SingularDiagonal : Error {
    using Error::Error;
};
struct Inconsistent : Error {
    using Error::Error;
};
struct Infeasible : Error {
    using Error::Error;
};
struct Unbounded : Error {
    using Error::Error;
};
struct IterationLimit : Error {
    using Error::Error;
};
struct NumericalBreakdown : Error {
    using Error::Error;
};
struct KTooLarge : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

/// Raised when a stencil problem admits no exact weights (growth function is
/// infinite). `node` is set when the failure was detected during a global
/// assembly and identifies the offending node, -1 otherwise.
struct GrowthInfinite : Error {
    explicit GrowthInfinite(const std::string& what, long node_index = -1)
        : Error(what), node(node_index) {}
    long node = -1;
};

struct SolveFailed : Error {
    SolveFailed(const std::string& what, double achieved_residual)
        : Error(what), achieved(achieved_residual) {}
    double achieved = 0.0;
};

} // namespace mfd
