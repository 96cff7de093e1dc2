// The solid Cauchy transform of the unit-disc indicator is -conj(z) inside
// and -1/z outside, up to the orientation sign.

#include "dbar/kernel.hpp"

#include <cstdio>

int main() {
  using namespace dbar;
  QuadratureSpec spec;
  spec.outer_radius = 1.0;
  auto indicator = [](cdouble t) { return std::abs(t) < 1.0 ? cdouble(1.0) : cdouble(0.0); };
  for (cdouble z : {cdouble(0.3, 0.2), cdouble(-0.7, 0.5), cdouble(1.5, 0.0), cdouble(-1.2, 2.0)}) {
    const ScalarResult r = cauchy_transform(indicator, z, spec);
    const cdouble exact = std::abs(z) < 1.0 ? -std::conj(z) : -1.0 / z;
    std::printf("z = %+.2f%+.2fi  I = %+.12f%+.12fi  error %.1e  (%zu evaluations)\n", z.real(), z.imag(),
                r.value.real(), r.value.imag(), std::abs(r.value - exact), r.stats.evaluations);
  }
}
