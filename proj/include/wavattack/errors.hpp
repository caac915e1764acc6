#pragma once

#include <stdexcept>
#include <string>

namespace wavattack {

/// Argument outside the mathematical domain of an operation (negative
/// variance, transmittance outside [0,1], non-positive wavelength, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A well-posed problem has no admissible solution: no T2 balances the
/// attacking equations, no wavelength realizes a transmittance, and so on.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Target transmittance above the coupler's ceiling F^2. Distinct from an
/// empty inversion result inside a valid band.
class NoSolutionError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// The same-sign closed form was asked to solve inputs outside its branch.
class WrongBranchError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// An input violated a documented contract (e.g. an attack solution whose
/// residuals exceed tolerance was handed to Bob's detector model).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wavattack
