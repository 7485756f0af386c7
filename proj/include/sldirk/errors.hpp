#pragma once

#include <stdexcept>
#include <string>

namespace sldirk {

/// Invalid user input: malformed tableau, bad config value, unknown name.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A kinetic model was asked to operate on an unphysical state
/// (nonpositive density or temperature).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The time integration produced non-finite values.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step)
        : std::runtime_error(what), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

}  // namespace sldirk
