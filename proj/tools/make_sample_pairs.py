# Copyright 2026 The ddfuse Authors
# SPDX-License-Identifier: Apache-2.0
"""Generates the bundled synthetic infrared/visible test pairs.

Each scene is rendered twice from one layout: the visible image carries
texture, edges and shading with low target contrast; the infrared image is
smooth with bright warm targets. Output is deterministic for a given seed.

    python3 tools/make_sample_pairs.py data/pairs
"""

import argparse
import pathlib

import numpy as np

SIZE = 256


def write_pgm(path, img):
    data = np.clip(np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5), 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def smooth_noise(rng, octaves=5, base=4):
    """Sum of bilinearly upsampled random grids (value noise), in [0, 1]."""
    out = np.zeros((SIZE, SIZE))
    amp = 1.0
    total = 0.0
    for o in range(octaves):
        cells = base * 2**o
        grid = rng.random((cells + 1, cells + 1))
        coords = np.linspace(0, cells, SIZE, endpoint=False)
        i = coords.astype(int)
        f = coords - i
        g0 = grid[i][:, i] * (1 - f)[None, :] + grid[i][:, i + 1] * f[None, :]
        g1 = grid[i + 1][:, i] * (1 - f)[None, :] + grid[i + 1][:, i + 1] * f[None, :]
        out += amp * (g0 * (1 - f)[:, None] + g1 * f[:, None])
        total += amp
        amp *= 0.5
    return out / total


def box_blur(img, r):
    k = 2 * r + 1
    p = np.pad(img, r, mode="edge")
    c = p.cumsum(0).cumsum(1)
    c = np.pad(c, ((1, 0), (1, 0)))
    return (c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]) / (k * k)


def ellipse(yy, xx, cy, cx, ry, rx):
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def render(seed, horizon, building, trees, people, vehicles):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(float)
    texture = smooth_noise(rng)
    fine = rng.random((SIZE, SIZE))

    vi = np.where(yy < horizon, 0.75 - 0.25 * yy / horizon, 0.35 + 0.25 * texture)
    ir = np.where(yy < horizon, 0.08, 0.25 + 0.08 * texture)

    road = (yy > horizon + 20) & (np.abs(xx - SIZE / 2 - (yy - horizon) * 0.4) < 10 + (yy - horizon) * 0.5)
    vi = np.where(road, 0.55 + 0.05 * fine, vi)
    ir = np.where(road, 0.32, ir)

    if building is not None:
        x0, x1, top = building
        body = (xx >= x0) & (xx < x1) & (yy >= top) & (yy < horizon + 8)
        windows = body & ((xx - x0) % 14 >= 4) & ((xx - x0) % 14 < 10) & ((yy - top) % 16 >= 5) & ((yy - top) % 16 < 11)
        vi = np.where(body, 0.45, vi)
        vi = np.where(windows, 0.85, vi)
        ir = np.where(body, 0.3, ir)
        ir = np.where(windows, 0.42, ir)

    for cx, cy, r in trees:
        crown = ellipse(yy, xx, cy, cx, r, r * 0.8)
        trunk = (np.abs(xx - cx) < 2.5) & (yy > cy) & (yy < cy + 1.8 * r)
        vi = np.where(crown, 0.18 + 0.25 * fine * texture, vi)
        vi = np.where(trunk, 0.2, vi)
        ir = np.where(crown | trunk, 0.38, ir)

    for cx, cy, s in people:
        body = ellipse(yy, xx, cy, cx, 2.2 * s, 0.8 * s)
        head = ellipse(yy, xx, cy - 2.9 * s, cx, 0.6 * s, 0.6 * s)
        person = body | head
        vi = np.where(person, vi * 0.85 + 0.05, vi)
        ir = np.where(person, 0.92, ir)

    for cx, cy, w in vehicles:
        car = (np.abs(xx - cx) < w) & (np.abs(yy - cy) < 0.45 * w)
        engine = car & (xx > cx + 0.4 * w)
        wheels = ellipse(yy, xx, cy + 0.45 * w, cx - 0.6 * w, 0.2 * w, 0.2 * w) | ellipse(
            yy, xx, cy + 0.45 * w, cx + 0.6 * w, 0.2 * w, 0.2 * w
        )
        vi = np.where(car, 0.3 + 0.1 * fine, vi)
        vi = np.where(wheels, 0.1, vi)
        ir = np.where(car, 0.6, ir)
        ir = np.where(engine, 0.85, ir)
        ir = np.where(wheels, 0.75, ir)

    vi = vi + 0.02 * (fine - 0.5)
    ir = box_blur(ir, 2) + 0.015 * (rng.random((SIZE, SIZE)) - 0.5)
    return np.clip(ir, 0, 1), np.clip(vi, 0, 1)


SCENES = {
    "street": dict(seed=11, horizon=96, building=(20, 110, 30), trees=[(190, 80, 22), (235, 95, 16)],
                   people=[(150, 170, 7), (60, 190, 8)], vehicles=[(200, 205, 22)]),
    "forest": dict(seed=23, horizon=70, building=None,
                   trees=[(30, 70, 26), (80, 60, 30), (140, 75, 24), (200, 65, 28), (245, 80, 20)],
                   people=[(110, 180, 9), (175, 160, 6)], vehicles=[]),
    "camp": dict(seed=37, horizon=120, building=(150, 240, 60), trees=[(40, 110, 20)],
                 people=[(95, 200, 8)], vehicles=[(70, 170, 18), (190, 215, 24)]),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, params in SCENES.items():
        ir, vi = render(**params)
        write_pgm(args.out / f"{name}_ir.pgm", ir)
        write_pgm(args.out / f"{name}_vi.pgm", vi)


if __name__ == "__main__":
    main()
