#include "blowfly/error.hpp"

namespace blowfly {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonUniformSpacing: return "NonUniformSpacing";
        case ErrorCode::NegativeCount: return "NegativeCount";
        case ErrorCode::IndivisibleLag: return "IndivisibleLag";
        case ErrorCode::WindowTooShort: return "WindowTooShort";
        case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
        case ErrorCode::InvalidSigma: return "InvalidSigma";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParticleDepletion: return "ParticleDepletion";
        case ErrorCode::AllWeightsDegenerate: return "AllWeightsDegenerate";
        case ErrorCode::Divergence: return "Divergence";
        case ErrorCode::ZeroCount: return "ZeroCount";
        case ErrorCode::NonStationary: return "NonStationary";
        case ErrorCode::NonInvertible: return "NonInvertible";
        case ErrorCode::OptimFailed: return "OptimFailed";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    }
    return "Unknown";
}

}  // namespace blowfly
