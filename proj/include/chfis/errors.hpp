#pragma once

#include <stdexcept>
#include <string>

namespace chfis {

/// Failure categories surfaced by the library. Every throwing operation
/// documents which of these it can raise.
enum class errc {
    non_monotone_axis,
    shape_mismatch,
    non_finite_value,
    contraction_violated,
    degenerate_grid,
    cell_out_of_range,
    depth_too_large,
    out_of_domain,
    insufficient_samples,
    ratio_condition_violated,
    non_uniform_parameters,
    axes_differ,
    domain_mismatch,
    magnitude_too_large,
    syntax_error,
    internal_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::non_monotone_axis: return "NonMonotoneAxis";
        case errc::shape_mismatch: return "ShapeMismatch";
        case errc::non_finite_value: return "NonFiniteValue";
        case errc::contraction_violated: return "ContractionViolated";
        case errc::degenerate_grid: return "DegenerateGrid";
        case errc::cell_out_of_range: return "CellOutOfRange";
        case errc::depth_too_large: return "DepthTooLarge";
        case errc::out_of_domain: return "OutOfDomain";
        case errc::insufficient_samples: return "InsufficientSamples";
        case errc::ratio_condition_violated: return "RatioConditionViolated";
        case errc::non_uniform_parameters: return "NonUniformParameters";
        case errc::axes_differ: return "AxesDiffer";
        case errc::domain_mismatch: return "DomainMismatch";
        case errc::magnitude_too_large: return "MagnitudeTooLarge";
        case errc::syntax_error: return "SyntaxError";
        case errc::internal_error: return "InternalError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what),
          code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace chfis
