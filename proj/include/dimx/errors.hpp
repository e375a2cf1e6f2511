#pragma once

#include <stdexcept>
#include <string>

namespace dimx {

// Malformed CSV or JSON input. Carries the offending location when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long row = -1, long column = -1)
        : std::runtime_error(what), row_(row), column_(column) {}
    long row() const { return row_; }
    long column() const { return column_; }

private:
    long row_;
    long column_;
};

// Caller broke an operation's precondition (bad dimensions, bad config).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// PCA input whose centered matrix has rank < 2.
class DegenerateFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Constraint box that is empty once equality locks are applied.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Autoencoder loss became non-finite.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, int epoch)
        : std::runtime_error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

}  // namespace dimx
