#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maxcorr {

/// Raised on out-of-domain arguments (bad batch geometry, v outside [0,1], J <= 0, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A batch column with zero sample variance; its correlations are undefined.
class ZeroVarianceColumn : public std::runtime_error {
public:
    explicit ZeroVarianceColumn(std::ptrdiff_t column)
        : std::runtime_error("zero-variance column " + std::to_string(column)),
          column_(column) {}

    std::ptrdiff_t column() const noexcept { return column_; }

private:
    std::ptrdiff_t column_;
};

/// Every sample sits at v = 1, so the tail integral sum vanishes and the MLE diverges.
class AllSamplesAtOne : public std::runtime_error {
public:
    AllSamplesAtOne() : std::runtime_error("all samples equal 1; J estimator diverges") {}
};

/// Broken internal invariant (e.g. |R_ij| well above 1, Cholesky failure after repair).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace maxcorr
