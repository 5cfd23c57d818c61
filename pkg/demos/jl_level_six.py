"""New-form zeta functions at level 6.

Combining Gamma_0(m) data for m | 6 with exponents beta(6/m) removes
everything the old forms contribute. What survives looks like a cocompact
group: no parabolic part, and an identity part of twice the modular area.
"""
import cmath

from selberg_det import groupdata as gd
from selberg_det import jl
from selberg_det import zetas as zt

data = jl.level_data(6)
print("exponents:", data.exponents())
for m, d in data.by_divisor.items():
    print(f"  Gamma_0({m}): index {d.descriptor.rep_dim}, cusps {d.k}")

print()
print(f"{'s':>10} {'Z_I^new / Z_I(2 area)':>24} {'Z_P^new':>22} {'F':>22} {'Z_H^new':>22}")
for s in (1.7, 2.0, 3.0 + 0.5j):
    zi = jl.newform_zeta("I", s, data).value / cmath.exp(2 * zt.log_zeta_identity(s, gd.MODULAR_GROUP))
    zp = jl.newform_zeta("P", s, data).value
    f, _ = jl.jl_determinant_F(s, data)
    zh = jl.newform_zeta("H", s, data).value
    print(f"{s!s:>10} {zi:24.12f} {zp:22.12f} {f.value:22.12f} {zh:22.12f}")

print()
print("beta(a) for a <= 30:", [jl.beta_coeff(a) for a in range(1, 31)])
