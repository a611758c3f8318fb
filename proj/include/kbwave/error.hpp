#ifndef KBWAVE_ERROR_HPP
#define KBWAVE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace kbwave {

/// Failure categories raised by the library. Callers that need to react to a
/// specific condition (a pole, an infeasible branch) switch on `kind()`.
enum class ErrorKind {
    invalid_argument,
    infinite_period,
    pole,
    underdetermined,
    no_real_orbit,
    not_solitary_configuration,
    not_periodic_configuration,
    singular_periodic_branch,
    limiting_constraint_unmet,
    branch_infeasible,
    unresolved_branch,
    singular_sample,
    degenerate_domain,
    domain_too_small,
    start_point_infeasible,
    disjoint_domains,
    blow_up,
    out_of_branch_range,
};

inline std::string_view to_string(ErrorKind k) noexcept
{
    switch (k) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::infinite_period: return "infinite period";
    case ErrorKind::pole: return "pole";
    case ErrorKind::underdetermined: return "underdetermined";
    case ErrorKind::no_real_orbit: return "no real orbit at this zero";
    case ErrorKind::not_solitary_configuration: return "not the solitary configuration";
    case ErrorKind::not_periodic_configuration: return "not the periodic configuration";
    case ErrorKind::singular_periodic_branch: return "singular periodic branch";
    case ErrorKind::limiting_constraint_unmet: return "limiting constraint unmet";
    case ErrorKind::branch_infeasible: return "branch infeasible for these roots";
    case ErrorKind::unresolved_branch: return "unresolved branch";
    case ErrorKind::singular_sample: return "singular sample";
    case ErrorKind::degenerate_domain: return "degenerate domain";
    case ErrorKind::domain_too_small: return "domain too small for stencils";
    case ErrorKind::start_point_infeasible: return "start point infeasible";
    case ErrorKind::disjoint_domains: return "disjoint domains";
    case ErrorKind::blow_up: return "blow-up detected";
    case ErrorKind::out_of_branch_range: return "out of branch range";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
          kind_(kind), detail_(detail)
    {}

    explicit Error(ErrorKind kind) : Error(kind, std::string{}) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

} // namespace kbwave

#endif
