// Sweep over the w_alpha family that pins the thresholds of the scalar circle
// suite. Its output is kept in tests/fixtures/walpha_oracle.log.
#include <cstdio>

#include "nchs/classical.hpp"

using namespace nchs;

int main() {
  const int M = 512;
  const std::vector<int> cutoffs{16, 32, 64};
  std::printf("# M = %d, cutoffs 16/32/64, half-sample grid\n", M);
  std::printf("# alpha  rho16     rho32     rho64     rho_shrink  rho_hat(M) rho_hat(2M) hs_shrink excess   a2(M)     a2(2M)    a2_growth\n");
  for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.45, 0.5, 0.55, 0.6, 0.7, 0.8}) {
    const CircleVerdicts v = circle_verdicts([alpha](double t) { return w_alpha_value(alpha, t); }, M, cutoffs);
    std::printf("%.2f   %.6f  %.6f  %.6f  %.4f      %.6f   %.6f    %.4f    %+.4f  %8.4f  %8.4f  %.4f\n", alpha, v.rho[0],
                v.rho[1], v.rho[2], v.rho_shrink, v.hs.rho_hat, v.rho_hat_fine, v.hs_shrink, v.hs.angle_excess,
                v.a2.coarse, v.a2.fine, v.a2.ratio);
  }
}
