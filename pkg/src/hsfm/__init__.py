"""Numerical Strichartz Fourier analysis on the Heisenberg group."""

__version__ = "0.1.0"

from .fan import (FanGrid, FanPoint, MeasureKind, Symbol, build_fan, constant_symbol,
                  distribution, fan_integral, function_symbol, hormander_functional,
                  marcinkiewicz_report, measure_weight, power_symbol, table_symbol,
                  weak_l1_norm)
from .hgroup import (GroupFunction, GroupGrid, GroupPoint, group_inv, group_mul, left_translate,
                     lp_norm)
from .multiplier import (Kernel, apply_multiplier, convolve_with_kernel, kernel_coefficients,
                         kernel_eval)
from .sft import (SpectralFunction, forward, inverse, mixed_norm, plancherel_norm, project,
                  projection_residual, twisted_convolve)
from .specfun import c_norm, eigenvalue, laguerre_fn, laguerre_poly

__all__ = [
    "FanGrid", "FanPoint", "MeasureKind", "Symbol", "build_fan", "constant_symbol",
    "distribution", "fan_integral", "function_symbol", "hormander_functional",
    "marcinkiewicz_report", "measure_weight", "power_symbol", "table_symbol", "weak_l1_norm",
    "GroupFunction", "GroupGrid", "GroupPoint", "group_inv", "group_mul", "left_translate",
    "lp_norm", "Kernel", "apply_multiplier", "convolve_with_kernel", "kernel_coefficients",
    "kernel_eval", "SpectralFunction", "forward", "inverse", "mixed_norm", "plancherel_norm",
    "project", "projection_residual", "twisted_convolve", "c_norm", "eigenvalue", "laguerre_fn",
    "laguerre_poly",
]
