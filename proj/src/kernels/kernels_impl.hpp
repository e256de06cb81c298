#pragma once

#include "eegbeam/kernels.hpp"

namespace eegbeam::kern::detail {

extern const Ops scalar_ops;

// Null when the binary was built without the variant.
const Ops* avx2_ops();
const Ops* neon_ops();

bool cpu_has_avx2();

} // namespace eegbeam::kern::detail
