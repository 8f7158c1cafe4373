#include "vrcom/kernels.hpp"

#include <cstdlib>
#include <string>

namespace vrcom::kernels {

namespace avx2 {
bool available() {
#if defined(__x86_64__) || defined(_M_X64)
    return ops != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
} // namespace avx2

namespace {

struct Selection {
    const Ops* ops;
    std::string_view name;
};

Selection select() {
    const char* forced = std::getenv("VRCOM_KERNELS");
    if (forced) {
        const std::string s(forced);
        if (s == "scalar") return {&scalar::ops, "scalar"};
        if (s == "avx2" && avx2::available()) return {avx2::ops, "avx2"};
        // Unknown or unavailable request falls through to auto-detection.
    }
    if (avx2::available()) return {avx2::ops, "avx2"};
    return {&scalar::ops, "scalar"};
}

const Selection& selection() {
    static const Selection s = select();
    return s;
}

} // namespace

const Ops& active() { return *selection().ops; }

std::string_view active_name() { return selection().name; }

} // namespace vrcom::kernels
