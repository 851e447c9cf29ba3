"""Tabulate the phonon spectral density and its dispersive transform.

The piezo-electric bath absorbs at negative frequencies only (energy
flows from the qubit into the lattice at zero temperature).  The
geometric interference factor 1 - sinc(d* w) ripples the density with
period 2 pi / d*, and the Lorentzian cutoff rolls it off beyond w_c.

Writes the full profile to spectrum.csv and prints a short table.
Equivalent CLI call:

    python3 -m driventls spectrum --coupling 0.2 --d-star 20 \
        --omega-c 2 --omega-min -2.5 --omega-max 1.0 --points 701
"""

import numpy as np

from driventls import PhononBath, emit_spectrum, write_spectrum_csv

bath = PhononBath(coupling=0.2, separation=20.0, cutoff=2.0, quad_tol=1e-9)

rows = emit_spectrum(bath, -2.5, 1.0, 701)
with open("spectrum.csv", "w", encoding="utf-8") as fh:
    write_spectrum_csv(rows, bath, (-2.5, 1.0, 701), fh)

print("frequency   density      transform")
for w in (-2.0, -1.5, -1.0, -0.5, -0.25, 0.0, 0.5, 1.0):
    print(f"{w:+9.2f}   {bath.spectral_density(w):.6f}   "
          f"{bath.hilbert_transform(w):+.6f}")

dens = np.array([r.density for r in rows])
freqs = np.array([r.frequency for r in rows])
peaks = [freqs[i] for i in range(1, len(rows) - 1)
         if -2.0 < freqs[i] < -0.5
         and dens[i] > dens[i - 1] and dens[i] > dens[i + 1]]
print(f"\nripple maxima on (-2, -0.5): {', '.join(f'{p:.3f}' for p in peaks)}")
print(f"mean spacing {np.mean(np.diff(peaks)):.4f}, "
      f"interference period 2 pi / d* = {2 * np.pi / 20:.4f}")
print(f"transform slope at zero: {bath.hilbert_slope0():+.6f}")
print("profile written to spectrum.csv")
