"""Laplacian determinant of PSL(2, Z): spectral route against the zeta factors.

The spectral route runs a regularized Mellin transform of the heat trace.
The factorized route multiplies the I, E, P and hyperbolic zeta factors.
Their ratio should be exp(c1 s(s-1) + c2). The check is done with both
choices for the power of (s - 1/2) in the parabolic factor.
"""
import math

import numpy as np

from selberg_det import geodesics as geo
from selberg_det import groupdata as gd
from selberg_det import laplacedet as ld
from selberg_det import traceformula as tf

sub = gd.builtin("psl2z")
rep = gd.build_induced_rep(sub)
sp = tf.modular_scattering_provider()
classes = geo.enumerate_classes(1e5)

print("building heat trace ...")
heat = ld.SpectralHeatTrace(sub, sp)
fit_s = np.linspace(2, 6, 9)
held = np.linspace(6.25, 8, 8)
spec = {s: ld.log_det_automorphic_spectral(s, heat).value for s in np.concatenate([fit_s, held])}

for label, cfg in (("(s-1/2)^(-k/2)", ld.DetAssemblyConfig()), ("(s-1/2)^(+k/2)", ld.DetAssemblyConfig(zp_power=0.5))):
    fac = {s: sum(ld.factorized_parts(s, sub, classes, rep, sp, cfg, 1e5)["log"].values()).real for s in spec}
    c1, c2, rms = ld.fit_constants(fit_s, [spec[s] for s in fit_s], [fac[s] for s in fit_s])
    worst = max(abs(math.expm1(spec[s] - fac[s] - c1 * s * (s - 1) - c2)) for s in held)
    print(f"Z_P with {label}: c1 = {c1:+.8f}, c2 = {c2:+.6f}, fit rms {rms:.1e}, held-out {worst:.1e}")

print()
print("functional equation residual at s = 1/2 + 2i")
for n in (16, 24, 32):
    print(f"  degree {n}: {ld.functional_eq_residual(0.5 + 2j, sub, sp, degree=n):.2e}")
