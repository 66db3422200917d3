"""
Dictionary-matching localization under noise and reverberation
==============================================================
"""

import numpy as np

from binloc import (
    RoomConfig,
    StftConfig,
    build_dictionary,
    default_grid,
    estimate_dprtf_cpsd,
    generate_diffuse_noise,
    match_doa,
    mix_at_snr,
    render_source,
    select_band,
    simulate_brir,
    stft_forward,
    synth_spherical_head,
    vad_mask,
)
from binloc.datagen import synth_source

cfg = StftConfig()
hset = synth_spherical_head(0.0875)
dic = build_dictionary(hset, cfg)
grid = default_grid()
room_size = (5.0, 7.0, 3.0)
rng = np.random.default_rng(0)

print("30 instances per condition, speech-like bursts at 1.5 m\n")
print(" rt60   snr    ACC     MAE")
for rt60, snr in ((0.0, None), (0.3, 20.0), (0.3, 5.0), (0.6, 20.0), (0.6, 0.0)):
    room = RoomConfig(size_m=room_size, rt60_s=rt60, array_center_m=(2.4, 3.2, 1.5))
    est, truth = [], []
    for _ in range(30):
        az = float(grid[int(rng.integers(len(grid)))])
        brir = simulate_brir(room, az, 1.5, hset, max_order=8)
        x = render_source(brir, synth_source(rng, 8192, cfg.fs))
        if snr is not None:
            noise = generate_diffuse_noise(8192, 0.175, "white", seed=int(rng.integers(2 ** 31)), config=cfg)
            x = mix_at_snr(x, noise, snr)
        spec = select_band(stft_forward(x, cfg))
        vec, _ = estimate_dprtf_cpsd(spec, mask=vad_mask(spec))
        est.append(match_doa(vec, dic))
        truth.append(az)
    est = np.array(est)
    truth = np.array(truth)
    acc = float(np.mean(est == truth))
    mae = float(np.mean(np.abs(est - truth)))
    snr_txt = "clean" if snr is None else f"{snr:+.0f}dB"
    print(f"  {rt60:.1f}  {snr_txt:>6}  {acc * 100:4.0f}%  {mae:5.1f} deg")

print("\nclean anechoic estimates recover the dictionary exactly;")
print("reverberation and noise erode the direct-path ratio as expected")
