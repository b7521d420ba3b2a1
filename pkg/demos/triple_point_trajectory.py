"""Approaching the triple point of a lossy cavity dimer.

The hopping xi is ramped together with the coupling along
xi = k (g_t - g). Pairs containing xi gain two powers of the distance,
while the four-parameter set still improves at a linear rate. Steeper
trajectories lower the leading coefficient, up to the slope at which the
trajectory stops being admissible.
"""

import warnings

import numpy as np

from critmet import ModelParams
from critmet.metrology import fit_scaling, scalar_bound
from critmet.models import k_max, triple_point
from critmet.scan import ScanConfig, point_params, point_qfim, reference_coupling

lossy = ModelParams(omega_c=1.0, omega_a=0.7, kappa=0.1)
print("triple point (xi, g):", triple_point(lossy, dissipative=True))
print(f"largest admissible slope k_max = {k_max(lossy, dissipative=True):.4f}")

distances = np.geomspace(1e-3, 1e-5, 12)


def fit(subset, slope=1.0):
    cfg = ScanConfig(model="dd", state="ss", params=lossy, subset=subset, grid="trajectory", slope=slope)
    g_t = reference_coupling(cfg)
    pts = [(d * g_t, scalar_bound(point_qfim(cfg, point_params(cfg, d * g_t)), check=False).value)
           for d in distances]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return fit_scaling(pts)


for subset in [(1, 4), (2, 4), (3, 4), (4, 5), (1, 2, 3, 4)]:
    f = fit(subset)
    print(f"subset {subset}: exponent {f.exponent:.4f}")

for slope in (0.5, 1.0, 1.5, 2.0):
    print(f"slope {slope}: four-parameter prefactor {fit((1, 2, 3, 4), slope).prefactor:.1f}")
