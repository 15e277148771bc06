"""Synthetic fixtures: smooth textures, translated frame pairs, and a toy
recognition dataset with one global motion pattern per action class.

Everything is seeded and deterministic; the acceptance suite runs entirely on
fixtures produced here, with no external data.
"""

import json
from pathlib import Path

import numpy as np

from .bench import ACTIONS
from .raster import gaussian_smooth, save_pgm, warp_bilinear


def smooth_texture(width, height, seed, sigma=2.0, low=20.0, high=235.0):
    """Band-limited random texture stretched to [low, high]."""
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.0, 255.0, size=(height, width))
    tex = gaussian_smooth(noise, sigma)
    t_min, t_max = tex.min(), tex.max()
    return low + (tex - t_min) * (high - low) / (t_max - t_min)


def translated_pair(texture, shift):
    """(prev, next) with ground-truth flow `shift`: next(x) = prev(x - shift)."""
    tx, ty = shift
    height, width = texture.shape
    u = np.full((height, width), -float(tx))
    v = np.full((height, width), -float(ty))
    return texture, warp_bilinear(texture, (u, v))


def translation_suite(n_scenes=20, width=160, height=120, max_shift=4.0, seed=7):
    """Seeded scenes with random global translations of magnitude <= max_shift.

    Returns (prev, next, (tx, ty)) triples; shifts mix integer and fractional
    displacements and always include the axis-aligned unit cases.
    """
    rng = np.random.default_rng(seed)
    fixed = [(2.0, 0.0), (0.0, 3.0), (1.0, 0.0), (-2.0, 1.0)]
    scenes = []
    for idx in range(n_scenes):
        if idx < len(fixed):
            shift = fixed[idx]
        else:
            angle = rng.uniform(0.0, 2.0 * np.pi)
            radius = rng.uniform(0.5, max_shift)
            shift = (radius * np.cos(angle), radius * np.sin(angle))
            if rng.random() < 0.5:
                shift = (round(shift[0]), round(shift[1]))
                if shift == (0, 0):
                    shift = (1.0, 0.0)
        texture = smooth_texture(width, height, seed=[seed, idx])
        prev, nxt = translated_pair(texture, shift)
        scenes.append((prev, nxt, (float(shift[0]), float(shift[1]))))
    return scenes


# per-action orientation schedule (degrees, cycled over frame pairs)
MOTION_PATTERNS = {
    "walking": [0.0],
    "jogging": [90.0],
    "running": [0.0, 90.0, 180.0, 270.0],
    "boxing": [0.0, 180.0],
    "handwaving": [90.0, 270.0],
    "handclapping": [45.0, 225.0],
}


def _sequence_shifts(action, n_pairs, rng, magnitude=2.0, jitter=0.4):
    pattern = MOTION_PATTERNS[action]
    shifts = []
    for pair in range(n_pairs):
        angle = np.radians(pattern[pair % len(pattern)])
        mag = magnitude + rng.uniform(-jitter, jitter)
        shifts.append((mag * np.cos(angle), mag * np.sin(angle)))
    return shifts


def make_recognition_dataset(
    root,
    persons=10,
    sequences_per_action=2,
    frames=9,
    width=64,
    height=48,
    seed=0,
    box_margin=3,
):
    """Write a KTH-layout dataset whose classes differ by global motion pattern.

    Creates per-sequence frame directories (frame_000001.pgm ...), annotation
    files, and manifest.json under `root`; returns the manifest path.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for person in range(1, persons + 1):
        for action in ACTIONS:
            for seq in range(1, sequences_per_action + 1):
                seq_id = f"person{person:02d}_{action}_d{seq}"
                seq_rng = np.random.default_rng([seed, person, ACTIONS.index(action), seq])
                base = smooth_texture(
                    width, height, seed=[seed, person, seq], sigma=1.5
                )
                shifts = _sequence_shifts(action, frames - 1, seq_rng)

                # frame k samples the base at one cumulative offset, so each
                # frame carries a single interpolation pass
                drift = np.cumsum(np.asarray([(0.0, 0.0)] + shifts), axis=0)
                drift -= drift.mean(axis=0)

                frame_dir = root / seq_id
                frame_dir.mkdir(exist_ok=True)
                for k in range(frames):
                    off_u = np.full((height, width), drift[k, 0])
                    off_v = np.full((height, width), drift[k, 1])
                    frame = warp_bilinear(base, (off_u, off_v))
                    save_pgm(frame, frame_dir / f"frame_{k + 1:06d}.pgm")

                ann_path = root / f"{seq_id}.txt"
                with open(ann_path, "w") as fh:
                    for k in range(1, frames + 1):
                        fh.write(
                            f"{k} {box_margin} {box_margin} "
                            f"{width - 2 * box_margin} {height - 2 * box_margin}\n"
                        )
                # paths relative to the manifest keep the dataset movable
                records.append(
                    {
                        "id": seq_id,
                        "person": person,
                        "action": action,
                        "scenario": 1,
                        "frame_dir": frame_dir.name,
                        "annotation_file": ann_path.name,
                        "frame_count": frames,
                    }
                )

    manifest_path = root / "manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump({"records": records}, fh, indent=1)
    return manifest_path
