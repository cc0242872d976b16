"""
Charging through reservoir memory alone
=======================================

Switch off the direct coupling (``eta = 0``). The battery still charges,
entirely through the reservoir, and the stronger the coupling to the
non-Markovian bath the more energy it stores.
"""
from nmbattery import SystemParams, TimeGrid, metrics, solve
from _plotting import plt, save

grid = TimeGrid(20.0, 8000)
series = {g: metrics(solve(SystemParams(g1=g, g2=g), grid=grid))
          for g in (0.3, 0.5, 0.7, 1.0)}

for g, m in series.items():
    print(f"g={g:.1f}  dE_max={m.delta_e.max():.4f}  W_max={m.ergotropy.max():.4f}")

if plt is not None:
    fig, ax = plt.subplots(figsize=(5, 4))
    for g, m in series.items():
        ax.plot(m.times, m.delta_e, label=f"g={g}")
    ax.set(xlabel="gamma t", ylabel="dE / W0")
    ax.legend()
    save(fig, "memory_charging.png")
