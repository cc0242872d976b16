"""
Where in the (eta, delta) plane can the battery do work?
========================================================

Evaluate the maximal ergotropy on a grid of direct couplings and detunings.
Each row's first active cell traces the boundary of the working phase. The
grid points are independent, so they are spread over all cores.
"""
import numpy as np

from nmbattery import SystemParams, TimeGrid, phase_diagram
from _plotting import plt, save

n = 30
pd = phase_diagram(np.linspace(0, 2, n), np.linspace(0, 2, n),
                   SystemParams(g1=0.7, g2=0.7), grid=TimeGrid(20.0, 4000), workers=0)

for eta, onset in zip(pd.eta_axis[::5], pd.boundary[::5]):
    print(f"eta={eta:.2f}  onset delta={onset:.3f}")

if plt is not None:
    fig, ax = plt.subplots(figsize=(5, 4))
    extent = [pd.delta_axis[0], pd.delta_axis[-1], pd.eta_axis[0], pd.eta_axis[-1]]
    im = ax.imshow(pd.Wmax_grid, origin="lower", extent=extent, aspect="auto")
    ax.plot(pd.boundary, pd.eta_axis, "w.")
    ax.set(xlabel="delta / gamma", ylabel="eta / gamma")
    fig.colorbar(im, label="W_max / W0")
    save(fig, "phase_diagram.png")
