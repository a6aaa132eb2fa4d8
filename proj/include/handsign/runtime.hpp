#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace handsign {

/// Training allocates and frees many multi-megabyte matrices per batch. By
/// default glibc hands those back to the kernel each time, so every batch
/// pays page faults again. Keeping them in the heap avoids that. Call once
/// at program start; a no-op elsewhere.
inline void tune_allocator()
{
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace handsign
