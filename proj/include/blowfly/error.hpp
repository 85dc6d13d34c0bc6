#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blowfly {

enum class ErrorCode {
    MissingFile,
    MalformedRow,
    NonUniformSpacing,
    NegativeCount,
    IndivisibleLag,
    WindowTooShort,
    NonPositiveParameter,
    InvalidSigma,
    InvalidArgument,
    ParticleDepletion,
    AllWeightsDegenerate,
    Divergence,
    ZeroCount,
    NonStationary,
    NonInvertible,
    OptimFailed,
    InsufficientHistory,
    SchemaMismatch,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-checkable code. `index`
// holds the offending line number, step, or element position when one applies.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), index_(index) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

}  // namespace blowfly
