#pragma once

#include <stdexcept>
#include <string>

namespace arb {

enum class Errc {
    invalid_record,   // record violates its own invariants (e.g. cached > input)
    degenerate_cost,  // zero/negative mean attempt cost
    mixed_units,      // records or datasets with conflicting cost units
    not_found,        // unknown provider / problem id
    out_of_support,   // estimator asked beyond the observed attempt count
    empty_input,      // empty dataset / record list / sample
    overlapping_split,// train and test share problem ids
    bad_config,       // invalid parameter (step <= 0, fraction out of range, ...)
    parse_error,      // malformed input file
    io_error,         // filesystem failure
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_record:    return "invalid-record";
        case Errc::degenerate_cost:   return "degenerate-cost";
        case Errc::mixed_units:       return "mixed-units";
        case Errc::not_found:         return "not-found";
        case Errc::out_of_support:    return "out-of-support";
        case Errc::empty_input:       return "empty-input";
        case Errc::overlapping_split: return "overlapping-split";
        case Errc::bad_config:        return "bad-config";
        case Errc::parse_error:       return "parse-error";
        case Errc::io_error:          return "io-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace arb
