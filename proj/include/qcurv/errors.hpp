#pragma once

#include <stdexcept>
#include <string>

namespace qcurv {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_grid : error {
    using error::error;
};

struct domain_error : error {
    using error::error;
};

// Tail integrand K e^{4u} s^3 is not integrable at infinity.
struct divergent_tail : error {
    using error::error;
};

struct oracle_failure : error {
    double estimate;
    oracle_failure(const std::string& what, double est) : error(what), estimate(est) {}
};

// max 4u exceeded the exponent guard
struct blow_up : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

}  // namespace qcurv
