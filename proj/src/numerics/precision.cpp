#include "renorm/numerics/precision.hpp"

#include <stdexcept>

namespace renorm {

std::string to_string(ArithmeticMode mode) {
    return mode == ArithmeticMode::ExactRational ? "exact-rational" : "extended-float";
}

ArithmeticMode arithmetic_mode_from_string(const std::string& name) {
    if (name == "exact-rational" || name == "rational" || name == "exact")
        return ArithmeticMode::ExactRational;
    if (name == "extended-float" || name == "extended" || name == "float")
        return ArithmeticMode::ExtendedFloat;
    throw std::invalid_argument("unknown arithmetic mode '" + name + "'");
}

void PrecisionContext::validate() const {
    if (float_bits < 64) throw std::invalid_argument("float_bits must be >= 64");
    if (!(quad_tol > 0)) throw std::invalid_argument("quad_tol must be positive");
    if (grid_points < 3) throw std::invalid_argument("grid_points must be >= 3");
    if (max_panels < 1) throw std::invalid_argument("max_panels must be positive");
}

PrecisionContext PrecisionContext::exact() {
    PrecisionContext ctx;
    ctx.mode = ArithmeticMode::ExactRational;
    return ctx;
}

PrecisionContext PrecisionContext::extended(unsigned float_bits) {
    PrecisionContext ctx;
    ctx.float_bits = float_bits;
    return ctx;
}

}  // namespace renorm
