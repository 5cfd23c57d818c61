"""Selberg zeta of PSL(2, Z) by Euler product and by transfer determinant.

The two routes share nothing beyond the group: one sums over primitive
geodesics, the other takes a Fredholm determinant of the Mayer operator.
"""
import time

from selberg_det import geodesics as geo
from selberg_det import groupdata as gd
from selberg_det import transferop as to
from selberg_det import zetas as zt

sub = gd.builtin("psl2z")
rep = gd.build_induced_rep(sub)

for x in (1e4, 1e5, 1e6):
    t0 = time.perf_counter()
    classes = geo.enumerate_classes(x)
    print(f"norm <= {x:.0e}: {len(classes)} primitive classes ({time.perf_counter() - t0:.2f}s)")

classes = geo.enumerate_classes(1e6)
print()
print(f"{'s':>5} {'transfer':>22} {'euler (1e6)':>22} {'gap':>9} {'euler est':>9}")
for s in (1.5, 2.0, 2.5, 3.0):
    t = to.zeta_via_transfer(s, sub, rep, 24)
    e = zt.selberg_zeta_euler(s, classes, rep, norm_max=1e6)
    gap = abs(t.value - e.value) / abs(t.value)
    print(f"{s:5.2f} {t.value.real:22.15f} {e.value.real:22.15f} {gap:9.1e} {e.abs_error_estimate / abs(e.value):9.1e}")

print()
for n in (16, 24, 30):
    print(f"|Z(1)| at degree {n}: {abs(to.zeta_via_transfer(1.0, sub, rep, degree=n).value):.2e}")
