"""
Three independent solvers, one answer
=====================================

The amplitudes obey a pair of Volterra equations with an exponential memory.
We solve them three ways: an auxiliary-variable ODE, direct quadrature of the
memory integral, and exact Laplace inversion by partial fractions. Then we
check that all of them agree.
"""
from nmbattery import SystemParams, TimeGrid, cross_validate, solve_laplace

params = SystemParams(eta=1.5, g1=0.7, g2=0.7, delta=1.1)

sol = solve_laplace(params)
print("poles (units of gamma):")
for s in sol.poles:
    print(f"  {s.real:+.5f} {s.imag:+.5f}i")
print(f"minimum pole separation {sol.min_separation:.3e}")

report = cross_validate(params, grid=TimeGrid(20.0, 8000))
print(report.summary())

# A grid far too coarse for the quadrature is caught by the same check.
print(cross_validate(params, grid=TimeGrid(20.0, 20)).summary())
