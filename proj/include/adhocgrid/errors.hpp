#pragma once

#include <stdexcept>
#include <string>

namespace adhocgrid {

/// Argument outside the mathematical domain of an operation (e.g. a
/// nonpositive load voltage fed to a logarithm).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested loading exceeds what the network (or its two-bus worst case)
/// can supply.
class InfeasiblePower : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(int iterations, double residual)
        : std::runtime_error("power flow did not converge after " + std::to_string(iterations) +
                             " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations),
          residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class NotAtEquilibrium : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepSizeUnderflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace adhocgrid
