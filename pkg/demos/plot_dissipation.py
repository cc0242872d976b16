"""
Stronger battery dissipation slows charging
===========================================

With the charger coupling fixed, a larger battery-reservoir coupling ``g2``
leaks energy faster. The average charging power ``P = dE/t`` over the first
ten inverse widths falls steadily as ``g2`` grows.
"""
import numpy as np

from nmbattery import SystemParams, TimeGrid, metrics, solve
from _plotting import plt, save

grid = TimeGrid(10.0, 4000)
series = {}
for g2 in (0.7, 1.0, 1.5, 2.0):
    series[g2] = metrics(solve(SystemParams(eta=1.5, g1=0.7, g2=g2), grid=grid))

for g2, m in series.items():
    mean_power = np.trapezoid(m.power, m.times) / grid.t_end
    print(f"g2={g2:.1f}  <P>={mean_power:.4f}  dE_max={m.delta_e.max():.4f}")

if plt is not None:
    fig, ax = plt.subplots(figsize=(5, 4))
    for g2, m in series.items():
        ax.plot(m.times, m.power, label=f"g2={g2}")
    ax.set(xlabel="gamma t", ylabel="P / (W0 gamma)")
    ax.legend()
    save(fig, "dissipation.png")
