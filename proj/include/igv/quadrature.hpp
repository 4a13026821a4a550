#pragma once

#include "igv/types.hpp"

namespace igv {

// Trapezoid-rule time average of equally spaced samples (one row per time
// point, at least two rows). Returns one entry per column.
Vector trapezoid_mean(const Matrix& samples);

// Rows k0..k1 inclusive of a sampled state signal (φ, ξ).
Matrix state_trace(const Matrix& samples, std::size_t k0, std::size_t k1);

// Epoch trace of a zero-order-held input (u°, ε and its estimate). Row k
// holds on [t_k, t_{k+1}), so the trace over [t_k0, t_k1] is rows
// k0..k1-1 closed by the left limit at t_k1, which is row k1-1 again.
Matrix held_trace(const Matrix& samples, std::size_t k0, std::size_t k1);

}  // namespace igv
