"""Writes the ten 32x32 RGB fixture images used by the golden-report tests."""
import pathlib

import numpy as np
from PIL import Image

OUT = pathlib.Path(__file__).parent / "images"
N = 32


def grid():
    y, x = np.mgrid[0:N, 0:N] / (N - 1)
    return y, x


def stack(r, g, b):
    return np.clip(np.stack([r, g, b], axis=-1), 0.0, 1.0)


def make(rng):
    y, x = grid()
    checker = ((np.arange(N)[:, None] // 4 + np.arange(N)[None, :] // 4) % 2).astype(float)
    disc = ((y - 0.5) ** 2 + (x - 0.5) ** 2 < 0.1).astype(float)
    return {
        "gradient_warm": stack(0.3 + 0.7 * x, 0.2 + 0.3 * y, 0.1 + 0.0 * x),
        "gradient_cool": stack(0.1 + 0.0 * x, 0.3 + 0.3 * y, 0.4 + 0.6 * x),
        "checker_fine": stack(checker, 0.8 * checker, 0.6 * checker),
        "disc_on_grey": stack(0.5 + 0.4 * disc, 0.5 - 0.3 * disc, 0.5 - 0.3 * disc),
        "noise_uniform": rng.uniform(0.0, 1.0, (N, N, 3)),
        "noise_low": stack(*(0.5 + 0.05 * rng.standard_normal((3, N, N)))),
        "stripes_vertical": stack(*(0.5 + 0.5 * np.sin(2 * np.pi * 3 * x) * np.ones((3, 1, 1)))),
        "flat_bright": stack(0.9 + 0 * x, 0.88 + 0 * x, 0.85 + 0 * x),
        "corner_patch": stack(0.2 + 0.7 * ((x > 0.6) & (y < 0.4)), 0.25 + 0 * x, 0.3 + 0 * x),
        "ring_noise": stack(
            0.5 + 0.4 * np.cos(12 * np.hypot(x - 0.5, y - 0.5)) + 0.05 * rng.standard_normal((N, N)),
            0.4 + 0 * x,
            0.6 - 0.3 * disc,
        ),
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, img in make(np.random.default_rng(7)).items():
        Image.fromarray(np.round(img * 255).astype(np.uint8), "RGB").save(OUT / f"{name}.png")


if __name__ == "__main__":
    main()
