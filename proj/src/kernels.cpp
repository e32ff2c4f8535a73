#include "prom/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace prom::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* resolve(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return &detail::scalar_table;
        case Backend::Avx2:
            if (!avx2_available())
                throw std::runtime_error("avx2 backend requested but not available on this cpu");
            return &detail::avx2_table;
        case Backend::Auto:
        default: {
            const char* env = std::getenv("PROM_KERNELS");
            if (env != nullptr) {
                if (std::strcmp(env, "scalar") == 0) return &detail::scalar_table;
                if (std::strcmp(env, "avx2") == 0) return resolve(Backend::Avx2);
            }
            return avx2_available() ? &detail::avx2_table : &detail::scalar_table;
        }
    }
}

const KernelTable* active = nullptr;

}  // namespace

bool avx2_available() {
    return detail::avx2_table.name != nullptr && cpu_has_avx2();
}

const KernelTable& table() {
    if (active == nullptr) active = resolve(Backend::Auto);
    return *active;
}

void set_backend(Backend b) { active = resolve(b); }

std::string backend_name() { return table().name; }

}  // namespace prom::kernels
