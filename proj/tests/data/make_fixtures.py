# Copyright 2026 The C2F Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the reference fixtures under tests/data.

natural/      128x128 crops of public-domain scikit-image sample photos.
msssim/       five image pairs plus values from tf.image.ssim_multiscale.
pchip.csv     scipy.interpolate.PchipInterpolator values and integrals.
"""
import os

import numpy as np
from PIL import Image
from scipy.interpolate import PchipInterpolator
from skimage import data, filters

HERE = os.path.dirname(os.path.abspath(__file__))
WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


def natural():
    crops = {
        "astronaut": (data.astronaut(), 30, 180),
        "chelsea": (data.chelsea(), 60, 120),
        "coffee": (data.coffee(), 150, 250),
        "rocket": (data.rocket(), 200, 250),
        "hubble": (data.hubble_deep_field(), 300, 300),
    }
    for name, (img, y, x) in crops.items():
        Image.fromarray(img[y:y + 128, x:x + 128, :3]).save(
            os.path.join(HERE, "natural", name + ".png"))


def scales_for(h, w):
    s = 1
    while s < 5:
        h, w = (h + 1) // 2, (w + 1) // 2
        if h < 11 or w < 11:
            break
        s += 1
    return s


def msssim():
    import tensorflow as tf
    rng = np.random.default_rng(7)
    astro = data.astronaut()
    coffee = data.coffee()
    pairs = []
    a = astro[0:192, 0:200]
    pairs.append((a, np.clip(a + rng.normal(0, 12, a.shape), 0, 255)))
    b = coffee[100:280, 50:250]
    blurred = filters.gaussian(b, sigma=1.2, channel_axis=-1, preserve_range=True)
    pairs.append((b, blurred))
    c = astro[200:400, 150:327]
    pairs.append((c, np.clip(c.astype(float) * 0.8 + 30, 0, 255)))
    d = coffee[0:96, 0:128]
    pairs.append((d, np.clip(d + rng.normal(0, 25, d.shape), 0, 255)))
    e = astro[300:377, 300:365]
    pairs.append((e, np.roll(e, 1, axis=1)))
    rows = ["pair,height,width,scales,msssim"]
    for i, (ref, dist) in enumerate(pairs):
        ref = np.round(ref).astype(np.uint8)
        dist = np.round(dist).astype(np.uint8)
        Image.fromarray(ref).save(os.path.join(HERE, "msssim", f"ref{i}.png"))
        Image.fromarray(dist).save(os.path.join(HERE, "msssim", f"dist{i}.png"))
        h, w = ref.shape[:2]
        s = scales_for(h, w)
        pw = np.array(WEIGHTS[:s]) / sum(WEIGHTS[:s])
        v = tf.image.ssim_multiscale(
            tf.constant(ref[None].astype(np.float64)),
            tf.constant(dist[None].astype(np.float64)), 255.0,
            power_factors=pw.tolist(), filter_size=11, filter_sigma=1.5,
            k1=0.01, k2=0.03)
        rows.append(f"{i},{h},{w},{s},{float(v.numpy()[0]):.10f}")
    with open(os.path.join(HERE, "msssim", "reference.csv"), "w") as f:
        f.write("\n".join(rows) + "\n")


def pchip():
    rng = np.random.default_rng(3)
    rows = ["case,kind,a,b,value"]
    for case in range(4):
        x = np.sort(rng.uniform(25, 45, 6))
        y = np.sort(rng.uniform(-2, 1.5, 6))
        if case == 3:
            y[2:4] = y[2]  # flat stretch
        f = PchipInterpolator(x, y)
        for xi, yi in zip(x, y):
            rows.append(f"{case},knot,{float(xi)!r},{float(yi)!r},0")
        for q in np.linspace(x[0], x[-1], 7):
            rows.append(f"{case},eval,{float(q)!r},0,{float(f(q))!r}")
        a, b = x[0] + 0.3, x[-1] - 0.7
        rows.append(f"{case},integral,{float(a)!r},{float(b)!r},{float(f.integrate(a, b))!r}")
    with open(os.path.join(HERE, "pchip.csv"), "w") as f:
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    natural()
    pchip()
    msssim()
