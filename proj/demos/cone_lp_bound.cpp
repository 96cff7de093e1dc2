// Estimate the constant in ||S omega||_p <= C ||omega||_p on the cone
// z1 z2 = z3^2 from a random family of exact forms.

#include "dbar/probes.hpp"

#include <cstdio>

int main() {
  using namespace dbar;
  const WeightedVariety V = cone_variety();
  std::vector<AntiForm> family;
  for (const auto& t : random_exact_forms(V, 1.0, 6, 1)) family.push_back(t.form);
  const std::vector<NormSpec> specs{{2.0, sigma_min(V.dim(), 2.0, 1).sigma},
                                    {kInfinity, sigma_min(V.dim(), kInfinity, 1).sigma}};
  for (const auto& pr : lp_bound_probes(V, family, specs, 1.0)) {
    std::printf("p = %-4g sigma = %d delta = %.3f\n", pr.p, pr.sigma, pr.delta);
    for (const auto& row : pr.rows) std::printf("  %-10s ratio %.6f\n", row.id.c_str(), row.ratio());
    std::printf("  C >= %.6f\n", pr.constant());
  }
}
