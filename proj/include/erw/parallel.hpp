#pragma once

namespace erw {

/// Worker threads used by the parallel kernels. Reads ERW_THREADS on first
/// use (0 or unset means the OpenMP default).
int thread_count();

/// Overrides the thread cap; 0 restores the OpenMP default.
void set_thread_count(int n);

}  // namespace erw
