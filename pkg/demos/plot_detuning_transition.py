"""
Detuning drives a sudden onset of extractable work
==================================================

Scan the bath detuning at ``eta = 1.5``, ``g1 = g2 = 0.7``. The maximal
stored energy varies smoothly, but the maximal ergotropy stays exactly zero
up to a critical detuning and then switches on with a finite slope. A
bisection on the on/off indicator pins down the onset.
"""
import numpy as np

from nmbattery import (SystemParams, derivative_Wmax, find_critical_detuning,
                       scan_delta)
from _plotting import plt, save

template = SystemParams(eta=1.5, g1=0.7, g2=0.7)
deltas = np.linspace(0.0, 2.0, 41)
scan = scan_delta(template, deltas, workers=0)

crit = find_critical_detuning(template, (0.0, 2.0), coarse=scan)
print(f"critical detuning {crit.delta_c:.4f}, bracket "
      f"({crit.bracket[0]:.4f}, {crit.bracket[1]:.4f})")

energy = np.array([pt.deltaE_max for pt in scan])
work = np.array([pt.W_max for pt in scan])
slope = derivative_Wmax(scan)
for d, e, w in zip(deltas[::5], energy[::5], work[::5]):
    print(f"delta={d:.2f}  dE_max={e:.4f}  W_max={w:.4f}")

if plt is not None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(deltas, energy, "o-", label="dE_max")
    ax1.plot(deltas, work, "s-", label="W_max")
    ax1.axvline(crit.delta_c, color="k", ls="--", lw=0.8)
    ax1.set(xlabel="delta / gamma", ylabel="W0")
    ax1.legend()
    ax2.plot(deltas, slope)
    ax2.set(xlabel="delta / gamma", ylabel="dW_max / d delta")
    save(fig, "detuning_transition.png")
