#include "sspec/extended_real.hpp"

#include <cstdio>

namespace sspec {

std::string ExtendedReal::to_string() const {
  if (is_minus_infinity()) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v_);
  return buf;
}

}  // namespace sspec
