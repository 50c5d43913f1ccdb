#pragma once

#include <cstddef>
#include <string>

namespace renorm {

enum class ArithmeticMode { ExactRational, ExtendedFloat };

std::string to_string(ArithmeticMode mode);
ArithmeticMode arithmetic_mode_from_string(const std::string& name);

/// Arithmetic and resolution settings shared by every computation of a run.
struct PrecisionContext {
    ArithmeticMode mode = ArithmeticMode::ExtendedFloat;
    unsigned float_bits = 256;
    long double quad_tol = 1e-20L;   ///< absolute quadrature tolerance
    std::size_t grid_points = 1025;  ///< default sampling resolution on [0,1]
    std::size_t max_panels = 200000; ///< quadrature refinement cap

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;

    static PrecisionContext exact();
    static PrecisionContext extended(unsigned float_bits = 256);
};

}  // namespace renorm
