#include "nspolar/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace nspolar::kern {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& select() {
    if (const char* env = std::getenv("NSPOLAR_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return scalar_table();
        if (std::strcmp(env, "avx2") == 0 && avx2_table() && cpu_has_avx2())
            return *avx2_table();
    }
    if (avx2_table() && cpu_has_avx2()) return *avx2_table();
    return scalar_table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace nspolar::kern
