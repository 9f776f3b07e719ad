#pragma once

#include <stdexcept>
#include <string>

namespace nlw {

// Bad parameter values (negative variance, unknown kernel, k out of range).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Fields living on different lattices, wrong dimension.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Request exceeds an enumeration or memory guard.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical tolerance could not be met (Picard iteration, tree refinement).
class AccuracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, std::string binding)
        : std::runtime_error(what), binding_(std::move(binding)) {}
    const std::string& binding() const { return binding_; }

private:
    std::string binding_;
};

// Raised by the stepper when the grid sup leaves the guard band.
class BlowupError : public std::runtime_error {
public:
    BlowupError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

}  // namespace nlw
