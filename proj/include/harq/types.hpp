#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace harq {

// Retransmission combining discipline.
enum class Scheme { harq_i, harq_ir, harq_chase };

// How the per-round redundancy fractions are chosen.
enum class RateMode { fixed, variable };

// Which computational path produced an outage profile.
enum class OutageMethod { exact, gaussian, bound, quadrature, closed_form };

// Thrown when an iterative numeric procedure fails to reach its target
// accuracy. Maps to process exit code 2 in the CLI.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string_view to_string(Scheme s);
std::string_view to_string(RateMode r);
std::string_view to_string(OutageMethod m);

// Parsers accept the exact strings produced by to_string; throw
// std::invalid_argument otherwise.
Scheme parse_scheme(std::string_view text);
RateMode parse_rate_mode(std::string_view text);

} // namespace harq
