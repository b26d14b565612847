#include "harq/types.hpp"

namespace harq {

std::string_view to_string(Scheme s) {
    switch (s) {
    case Scheme::harq_i: return "HARQ_I";
    case Scheme::harq_ir: return "HARQ_IR";
    case Scheme::harq_chase: return "HARQ_CHASE";
    }
    return "?";
}

std::string_view to_string(RateMode r) {
    return r == RateMode::fixed ? "FIXED" : "VARIABLE";
}

std::string_view to_string(OutageMethod m) {
    switch (m) {
    case OutageMethod::exact: return "EXACT";
    case OutageMethod::gaussian: return "GAUSSIAN";
    case OutageMethod::bound: return "BOUND";
    case OutageMethod::quadrature: return "QUADRATURE";
    case OutageMethod::closed_form: return "CLOSED_FORM";
    }
    return "?";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "HARQ_I") return Scheme::harq_i;
    if (text == "HARQ_IR") return Scheme::harq_ir;
    if (text == "HARQ_CHASE") return Scheme::harq_chase;
    throw std::invalid_argument("unknown scheme: " + std::string(text));
}

RateMode parse_rate_mode(std::string_view text) {
    if (text == "FIXED") return RateMode::fixed;
    if (text == "VARIABLE") return RateMode::variable;
    throw std::invalid_argument("unknown rate mode: " + std::string(text));
}

} // namespace harq
