#pragma once

namespace lrsm {

// Execution policy for the data-parallel kernels (scan over t, cost-matrix
// fills, bootstrap and Monte-Carlo replicates). Serial is the reference
// implementation kept for testing; Parallel uses OpenMP. Both produce
// bit-identical results because every work item is independent and writes to
// its own slot.
enum class Exec { Serial, Parallel };

void set_max_threads(int threads);  // 0 = hardware default
int max_threads();

}  // namespace lrsm
