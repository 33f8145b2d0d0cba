"""Compare the numba kernels with their numpy fallbacks.

Each backend runs in a fresh interpreter because the switch is read at import
time. Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from pts import _accel
from pts.datasets import ShapeSpec, sample_shape
from pts.persistence import vr_persistence
from pts.matching import bottleneck, wasserstein
from pts.signature import PtsConfig, pts_embed

repeat = int(sys.argv[1])
cloud = sample_shape(ShapeSpec("torus", 120, 0.05, 1))
cloud2 = sample_shape(ShapeSpec("torus", 120, 0.1, 2))
h0a = vr_persistence(cloud, 0, np.inf)[0].finite()
h0b = vr_persistence(cloud2, 0, np.inf)[0].finite()
cfg = PtsConfig(sigma=0.05, grid_k=100, perturb_m=40, subspace_p=10)

tasks = {
    "vr_h1_120pts": lambda: vr_persistence(cloud, 1, 1.5),
    "wasserstein_119pts": lambda: wasserstein(h0a, h0b, 1.0),
    "bottleneck_119pts": lambda: bottleneck(h0a, h0b),
    "pts_embed_k100": lambda: pts_embed(h0a, cfg),
}
out = {"backend": _accel.backend()}
for name, fn in tasks.items():
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    out[name] = float(np.median(times))
print(json.dumps(out))
"""


def run(disable, repeat):
    env = dict(os.environ, PTS_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'kernel':<22}{'numba (ms)':>12}{'numpy (ms)':>12}{'speedup':>9}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<22}{1e3 * fast[key]:12.2f}{1e3 * slow[key]:12.2f}{slow[key] / fast[key]:9.1f}")


if __name__ == "__main__":
    main()
