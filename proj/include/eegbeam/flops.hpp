#pragma once

#include <atomic>
#include <cstdint>

namespace eegbeam::flops {

// Global multiply-add counter. Kernels bump it analytically (one unit per
// scalar fused multiply-add worth of work), so counts are deterministic and
// identical across ISA variants.
inline std::atomic<std::uint64_t>& counter() {
    static std::atomic<std::uint64_t> c{0};
    return c;
}

inline void add(std::uint64_t macs) {
    counter().fetch_add(macs, std::memory_order_relaxed);
}

inline std::uint64_t count() {
    return counter().load(std::memory_order_relaxed);
}

inline void reset() {
    counter().store(0, std::memory_order_relaxed);
}

// Scoped delta: elapsed() = multiply-adds since construction.
class Section {
public:
    Section() : start_(count()) {}
    std::uint64_t elapsed() const { return count() - start_; }
    void restart() { start_ = count(); }

private:
    std::uint64_t start_;
};

} // namespace eegbeam::flops
