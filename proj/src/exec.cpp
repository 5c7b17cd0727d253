#include "lrsm/exec.hpp"

#include <omp.h>

namespace lrsm {

namespace {
int g_max_threads = 0;
}

void set_max_threads(int threads) {
    g_max_threads = threads > 0 ? threads : 0;
    if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return g_max_threads > 0 ? g_max_threads : omp_get_max_threads(); }

}  // namespace lrsm
