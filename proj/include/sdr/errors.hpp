#pragma once

#include <stdexcept>
#include <string>

namespace sdr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or configuration. The CLI maps these to exit code 1.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Numerical failures. The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
public:
    NotPositiveDefinite(const std::string& what, double eigenvalue)
        : NumericalError(what), eigenvalue_(eigenvalue) {}
    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

class RankDeficient : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CertificateUndefined : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace sdr
