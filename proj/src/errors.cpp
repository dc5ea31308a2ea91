#include "urnlab/errors.hpp"

#include <cstdio>

namespace urnlab {

std::string format_complex(std::complex<double> z) {
  char buf[96];
  if (z.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.17g", z.real());
  } else {
    std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  }
  return buf;
}

}  // namespace urnlab
