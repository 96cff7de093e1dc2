// Solve dbar u = omega on the cusp z1^2 = z2^3 and check the answer by
// differentiating it along a chart.

#include "dbar/corpus.hpp"
#include "dbar/verify.hpp"

#include <cstdio>

int main() {
  using namespace dbar;
  const WeightedVariety V = cusp_variety();
  const TestForm t = exact_form("demo", V.n(), 1.0, "bump(0.1, 0.9) * (1 + zb2)");

  const auto points = sample_points(V, 4, 7, 0.2, 0.8);
  for (const auto& z : points) {
    const SolveResult r = solve(t.form, V, z, SolverConfig{});
    const cdouble u = r.value.at(MultiIndex{});
    std::printf("z = (%+.4f%+.4fi, %+.4f%+.4fi)  u = %+.6e%+.6ei  sigma = %d\n", z(0).real(), z(0).imag(),
                z(1).real(), z(1).imag(), u.real(), u.imag(), r.sigma);
  }

  const ResidualTable tab = residual_check(V, t.form, SolverConfig{}, points);
  std::printf("max |dbar u - omega| = %.3e over %zu points\n", tab.max, tab.rows.size());
  return tab.failures == 0 ? 0 : 1;
}
