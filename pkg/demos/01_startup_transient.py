"""
Startup transient of the reference motor
========================================

Simulates a V/F start of the 5-parameter motor model and prints what the
optimizers will later try to match: the three phase currents.
"""

import numpy as np

from imident import TRUE_PARAMS, SupplyProfile, simulate, simulate_states

# 220 V peak, 50 Hz, reached linearly after 0.5 s; 1 s of 1 kHz samples
supply = SupplyProfile()
print(TRUE_PARAMS)
print(supply)

# the raw dq states show the machine pulling up to synchronous speed
t, y = simulate_states(TRUE_PARAMS, supply)
speed = y[:, 4]
print(f"\nsynchronous speed {supply.synchronous_speed():.2f} rad/s")
for tk in (0.1, 0.25, 0.5, 0.75, 1.0):
    k = np.searchsorted(t, tk - 1e-12)
    print(f"  t = {t[k]:.2f} s  speed = {speed[k]:8.2f} rad/s")

# phase currents are what a current probe would record
wf = simulate(TRUE_PARAMS, supply)
peak = np.abs(wf.currents).max(axis=1)
print("\npeak |i| per phase:", np.round(peak, 3))
late = wf.t > 0.9
amp = np.abs(wf.currents[:, late]).max(axis=1)
print("amplitude over the last 0.1 s:", np.round(amp, 3))
print("phase sum stays balanced:", float(np.abs(wf.currents.sum(axis=0)).max()))

# the waveform can be saved and reloaded bit-exactly
from imident import write_waveform_csv  # noqa: E402
path = write_waveform_csv(wf, "startup_reference.csv")
print("\nwrote", path)
