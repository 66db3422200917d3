"""
Diffuse noise fields and their spatial coherence
================================================
"""

import numpy as np
from scipy.signal import csd, welch

from binloc import StftConfig, generate_diffuse_noise

cfg = StftConfig()
d = 0.157  # microphone spacing in meters

noise = generate_diffuse_noise(160000, d, "white", seed=1, config=cfg)
print(f"10 s of diffuse white noise, 2 channels, spacing {d} m")

f, s12 = csd(noise[0], noise[1], fs=cfg.fs, nperseg=512)
_, p1 = welch(noise[0], fs=cfg.fs, nperseg=512)
_, p2 = welch(noise[1], fs=cfg.fs, nperseg=512)
gamma = np.real(s12) / np.sqrt(p1 * p2)
model = np.sinc(2.0 * f * d / 343.0)

# the ideal spherically isotropic field has coherence sinc(2 pi f d / c);
# its first zero for this spacing sits near c / (2 d) ~ 1092 Hz
print("\n   freq   measured   sinc model")
for target in (125.0, 500.0, 1000.0, 1092.0, 2000.0, 3500.0):
    i = int(np.argmin(np.abs(f - target)))
    print(f"  {f[i]:6.0f}   {gamma[i]:+.3f}     {model[i]:+.3f}")

band = (f >= 100.0) & (f <= 4000.0)
print(f"\nmean absolute deviation over 100-4000 Hz: {np.mean(np.abs(gamma[band] - model[band])):.3f}")

for kind in ("white", "babble", "factory"):
    n = generate_diffuse_noise(32000, d, kind, seed=2, config=cfg)
    spec = np.abs(np.fft.rfft(n[0])) ** 2
    freqs = np.fft.rfftfreq(32000, 1 / cfg.fs)
    lo = spec[(freqs > 100) & (freqs < 400)].mean()
    hi = spec[(freqs > 2000) & (freqs < 3800)].mean()
    print(f"{kind:8s} spectral tilt 250 Hz -> 3 kHz: {10 * np.log10(hi / lo):+.1f} dB")
