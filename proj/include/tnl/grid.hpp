#pragma once

#include <stdexcept>

namespace tnl {

// Uniform N x N grid on the unit torus [0,1)^2.  Spectral coefficients are
// stored for wavenumbers -N/2 < k_i <= N/2 in a row-major array indexed by
// (k1 mod N, k2 mod N); row = k1, column = k2.  kmax = floor(N/3) is the
// dealiasing cutoff for quadratic products (2/3 rule).
struct TorusGrid {
  int n = 0;
  int kmax = 0;

  int size() const { return n * n; }

  int wrap(int k) const {
    int r = k % n;
    return r < 0 ? r + n : r;
  }
  // flat index of mode (k1, k2)
  int index(int k1, int k2) const { return wrap(k1) * n + wrap(k2); }
  // wavenumber represented by array position i in [0, n)
  int mode_of(int i) const { return i <= n / 2 ? i : i - n; }
  // grid coordinate of sample j in [0, n)
  double coord(int j) const { return static_cast<double>(j) / n; }

  bool operator==(const TorusGrid& o) const { return n == o.n; }
};

// Validates N (even, >= 8) and computes the dealias cutoff.
TorusGrid make_grid(int n);

}  // namespace tnl
