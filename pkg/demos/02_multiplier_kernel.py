"""A spectral multiplier applied two ways: on the fan and as a group convolution.

T_m f multiplies each Laguerre coefficient by m(k, lambda).  The same operator
is the convolution f * K with a kernel summed from Laguerre functions.  The
kernel route costs O(N^2) per time node, so it runs on a small grid.
"""

from hsfm.fan import constant_symbol, power_symbol
from hsfm.hgroup import lp_norm
from hsfm.multiplier import (apply_multiplier, convolve_with_kernel, default_kernel_grid, kernel_coefficients,
                             kernel_eval)
from hsfm.verify import make_corpus

grid, fan = default_kernel_grid()
f = make_corpus(0, grid, 1, fan, families=("band-limited",)).items[0]

for label, m in (("m = 1", constant_symbol(1.0, fan)), ("power(1, 2)", power_symbol(1, 2, 1))):
    K = kernel_coefficients(m, grid, fan)
    spectral = apply_multiplier(m, f, fan)
    convolved = convolve_with_kernel(f, K)
    gap = lp_norm(convolved - spectral, 2) / lp_norm(f, 2)
    print(f"{label:12s} K(0, 0) = {kernel_eval(K, grid.z[grid.origin_index], 0.0):.4f}"
          f"   ||f*K - T_m f|| / ||f|| = {gap:.4f}")
