#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatterlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Thrown when an argument violates a documented precondition.
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an iterative construction fails to converge.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a requested value lies outside the resolvable band/region.
struct range_error : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Thrown on malformed configuration (scenario files, symbol specs).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

inline double sq(double v) { return v * v; }

// Japanese bracket <t> = sqrt(1+t^2).
inline double jbracket(double t) { return std::sqrt(1.0 + t * t); }

// Least-squares slope of log(value) against log(t) over [tmin, tmax].
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

SlopeFit fit_loglog_slope(const std::vector<double>& times,
                          const std::vector<double>& values,
                          double tmin, double tmax);

// FNV-1a 64-bit hash, used for artifact manifests.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace scatterlab
