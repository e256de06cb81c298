#include <atomic>
#include <string>

#include "eegbeam/errors.hpp"
#include "eegbeam/flops.hpp"
#include "kernels_impl.hpp"

namespace eegbeam::kern {

namespace {

std::atomic<const Ops*> g_active{nullptr};
std::atomic<Isa> g_active_isa{Isa::scalar};

const Ops* resolve(Isa isa) {
    switch (isa) {
    case Isa::scalar: return &detail::scalar_ops;
    case Isa::avx2: return detail::cpu_has_avx2() ? detail::avx2_ops() : nullptr;
    case Isa::neon: return detail::neon_ops();
    }
    return nullptr;
}

const Ops& active_ops() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        Isa best = best_available();
        g_active.store(resolve(best), std::memory_order_release);
        g_active_isa.store(best, std::memory_order_release);
        ops = g_active.load(std::memory_order_acquire);
    }
    return *ops;
}

} // namespace

const char* isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "?";
}

bool isa_available(Isa isa) { return resolve(isa) != nullptr; }

Isa best_available() {
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

void force(Isa isa) {
    const Ops* ops = resolve(isa);
    if (!ops)
        throw ParameterError(std::string("kernel variant not available: ") + isa_name(isa));
    g_active.store(ops, std::memory_order_release);
    g_active_isa.store(isa, std::memory_order_release);
}

Isa active() {
    active_ops();
    return g_active_isa.load(std::memory_order_acquire);
}

const Ops& ops_for(Isa isa) {
    const Ops* ops = resolve(isa);
    if (!ops)
        throw ParameterError(std::string("kernel variant not available: ") + isa_name(isa));
    return *ops;
}

double dot(const double* a, const double* b, std::size_t n) {
    flops::add(n);
    return active_ops().dot(a, b, n);
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    flops::add(n);
    active_ops().axpy(y, alpha, x, n);
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    flops::add(static_cast<std::uint64_t>(rows) * cols);
    active_ops().gemv(a, rows, cols, x, y);
}

void ger(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
         const double* v) {
    flops::add(static_cast<std::uint64_t>(rows) * (cols + 1));
    active_ops().ger(a, rows, cols, alpha, u, v);
}

double sum_abs(const double* x, std::size_t n) { return active_ops().sum_abs(x, n); }

void scale(double* x, double alpha, std::size_t n) {
    flops::add(n);
    active_ops().scale(x, alpha, n);
}

} // namespace eegbeam::kern
