#include "blowfly/mif.hpp"

namespace blowfly {

void MifConfig::validate(std::size_t dim) const {
    if (particles < 2) throw Error(ErrorCode::InvalidArgument, "need at least two particles");
    if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "need at least one iteration");
    if (rw_sd.size() != dim) throw Error(ErrorCode::InvalidArgument, "rw_sd needs one entry per parameter");
    for (const double s : rw_sd)
        if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rw_sd must be non-negative");
    if (!(cooling > 0.0 && cooling <= 1.0)) throw Error(ErrorCode::InvalidArgument, "cooling must lie in (0, 1]");
    if (final_reps < 2) throw Error(ErrorCode::InvalidArgument, "final_reps must be at least 2");
}

std::vector<double> swarm_mean(const ParticleParams& swarm, std::size_t particles) {
    const std::size_t d = swarm.dim();
    std::vector<double> mean(d);
    const std::size_t rows = swarm.is_shared() ? 1 : particles;
    const auto first = swarm.row(0);
    for (std::size_t j = 0; j < d; ++j) {
        double offset = 0.0;
        for (std::size_t i = 1; i < rows; ++i) offset += swarm.row(i)[j] - first[j];
        mean[j] = first[j] + offset / static_cast<double>(rows);
    }
    return mean;
}

}  // namespace blowfly
