#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polaron {

// Excursion exceeded a hard cap. Carries the partial statistics at the point
// of breach; callers must not silently truncate.
class ResourceLimitError : public std::runtime_error {
public:
    ResourceLimitError(const std::string& msg, std::size_t individuals, double elapsed)
        : std::runtime_error(msg), individuals_(individuals), elapsed_(elapsed) {}
    std::size_t individuals() const { return individuals_; }
    double elapsed() const { return elapsed_; }

private:
    std::size_t individuals_;
    double elapsed_;
};

// Cap breach surfaced from sharded ensemble generation, with location.
class GenerationError : public std::runtime_error {
public:
    GenerationError(const std::string& msg, std::size_t shard, std::size_t draw)
        : std::runtime_error(msg), shard_(shard), draw_(draw) {}
    std::size_t shard() const { return shard_; }
    std::size_t draw() const { return draw_; }

private:
    std::size_t shard_;
    std::size_t draw_;
};

// Ensemble file could not be read; line is 1-based into the file.
class EnsembleLoadError : public std::runtime_error {
public:
    EnsembleLoadError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Numerical diagnostic failure (overflow after shifting, degenerate weights).
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Renewal plateau drift test failed: the horizon is too short for a read.
class NoPlateauError : public std::runtime_error {
public:
    NoPlateauError(const std::string& msg, double drift_ratio)
        : std::runtime_error(msg), drift_ratio_(drift_ratio) {}
    double drift_ratio() const { return drift_ratio_; }

private:
    double drift_ratio_;
};

}  // namespace polaron
