#pragma once

#include <cstddef>
#include <string>

namespace eegbeam::kern {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
Isa best_available();

// Force a specific variant (tests); throws ParameterError if unavailable.
void force(Isa isa);
Isa active();

// Raw f64 primitives. Matrices are dense row-major. Every call adds its
// analytic multiply-add count to flops::counter(), independent of ISA.

// sum_i a[i]*b[i]                                   (n MACs)
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha*x[i]                                (n MACs)
void axpy(double* y, double alpha, const double* x, std::size_t n);

// y = A*x, A rows x cols                            (rows*cols MACs)
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

// A += alpha * u * v^T                              (rows*(cols+1) MACs)
void ger(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
         const double* v);

// sum_i |x[i]|                                      (0 MACs, adds only)
double sum_abs(const double* x, std::size_t n);

// x[i] *= alpha                                     (n MACs)
void scale(double* x, double alpha, std::size_t n);

// Per-variant entry points, exposed so equivalence tests can pin a variant
// without touching the global dispatch state.
struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double*, double, const double*, std::size_t);
    void (*gemv)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*ger)(double*, std::size_t, std::size_t, double, const double*, const double*);
    double (*sum_abs)(const double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
};

// Throws ParameterError if the variant is not available on this machine.
const Ops& ops_for(Isa isa);

} // namespace eegbeam::kern
