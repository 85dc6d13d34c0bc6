#include <cstdlib>
#include <stdexcept>
#include <string>

#include "blowfly/kernels.hpp"

namespace blowfly::kernels {

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(BLOWFLY_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!isa_available(isa)) throw std::runtime_error("kernel ISA not available: " + std::string(to_string(isa)));
#if defined(BLOWFLY_HAVE_AVX2_KERNELS)
    if (isa == Isa::Avx2) return detail::kAvx2Table;
#endif
    return detail::kScalarTable;
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("BLOWFLY_SIMD");
    if (forced != nullptr && std::string(forced) == "scalar") return detail::kScalarTable;
    if (isa_available(Isa::Avx2)) return table(Isa::Avx2);
    return detail::kScalarTable;
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

}  // namespace blowfly::kernels
