#pragma once

// thin wrapper so callers compile with or without OpenMP

namespace lcrt {

int max_threads();
// caps the worker pool; n <= 0 leaves the runtime default
void set_threads(int n);
// reads CE_LCRT_THREADS if present
void apply_thread_env();

}  // namespace lcrt
