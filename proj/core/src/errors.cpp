#include "ldplab/errors.hpp"

namespace ldplab {

NumericalError::NumericalError(const std::string& what, std::size_t step, std::size_t path)
    : Error(what + " (step " + std::to_string(step) + ", path " + std::to_string(path) + ")"),
      step_(step),
      path_(path) {}

}  // namespace ldplab
