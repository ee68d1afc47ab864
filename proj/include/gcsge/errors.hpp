#pragma once

#include <stdexcept>
#include <string>

namespace gcsge {

/// Invalid or inconsistent configuration (grid, window, config file). CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical parameter outside its admissible range (e.g. w' not in (0,1)).
class ParameterError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Base for failures discovered while computing. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// max|phi| reached the singular threshold of the theory (|phi| -> 1).
class SingularStateError : public NumericalError {
public:
    SingularStateError(const std::string& what, double t, double max_amp)
        : NumericalError(what), t_(t), max_amp_(max_amp) {}

    double time() const noexcept { return t_; }
    double max_amplitude() const noexcept { return max_amp_; }

private:
    double t_;
    double max_amp_;
};

/// Growth measurement could not find a linear-regime fit window.
class FitWindowError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace gcsge
