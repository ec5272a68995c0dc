#ifndef CONECERT_ERRORS_HPP
#define CONECERT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace conecert {

// Exit-code contract shared by the CLI and the library error types:
//   0 pass, 1 config error, 2 domain error, 3 convergence error,
//   4 verification failure.

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inputs outside an operation's stated domain (cone non-membership,
// gamma <= 1, sigma = 0, ...). Maps to exit code 2.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Iterative solver gave up; carries the last residual. Exit code 3.
struct convergence_error : std::runtime_error {
    double residual;
    int iterations;
    convergence_error(const std::string& what, double res, int iters)
        : std::runtime_error(what), residual(res), iterations(iters) {}
};

// A requested estimate could not be produced (phase decomposition failed,
// all sampled functionals vanish, quadrature too coarse).
struct estimate_unavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A checked inequality failed beyond tolerance. Exit code 4.
struct verification_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace conecert

#endif
