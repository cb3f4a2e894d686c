#include "tnl/grid.hpp"

#include <string>

namespace tnl {

TorusGrid make_grid(int n) {
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid size must be even and at least 8, got " + std::to_string(n));
  }
  TorusGrid g;
  g.n = n;
  g.kmax = n / 3;  // 2/3-rule dealias cutoff
  return g;
}

}  // namespace tnl
