"""Full pipeline vs the variant without the South-pole step.

Prints time and mean/SD of |angular distortion| for both, per mesh. Times
are medians over alternating runs; "saved" is the median of the paired
differences.

    python3 scripts/skip_south_pole.py --family hemisphere --sizes 1000 5000 20000
"""
import argparse
import time
import warnings

import numpy as np

from diskconf import synthetic
from diskconf.metrics import angular_distortion
from diskconf.pipeline import disk_conformal_parameterize
from diskconf.quasiconformal import ClampWarning


def compare(mesh, repeats=5):
    t = np.empty((repeats, 2))
    res = {}
    for i in range(repeats):
        for j, skip in enumerate((False, True)):
            start = time.perf_counter()
            res[skip] = disk_conformal_parameterize(mesh, skip_south_pole=skip)
            t[i, j] = time.perf_counter() - start
    reps = {k: angular_distortion(mesh, v) for k, v in res.items()}
    return t, reps


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--family", nargs="+", default=["hemisphere"], choices=sorted(synthetic.FAMILIES))
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 5000, 20000])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    warnings.simplefilter("ignore", ClampWarning)

    print(f"{'mesh':<22}{'full: time / mean / SD':>28}{'skip: time / mean / SD':>28}{'excess':>9}{'saved':>8}")
    for fam in args.family:
        for n in args.sizes:
            mesh = synthetic.FAMILIES[fam](n)
            t, r = compare(mesh, args.repeats)
            f, s = r[False], r[True]
            tf, ts = np.median(t, axis=0)
            saved = np.median(t[:, 0] - t[:, 1]) / tf
            print(
                f"{fam + '-' + str(n):<22}"
                f"{tf:>12.3f} / {f.mean_abs_deg:.3f} / {f.sd_abs_deg:.3f}"
                f"{ts:>12.3f} / {s.mean_abs_deg:.3f} / {s.sd_abs_deg:.3f}"
                f"{s.mean_abs_deg - f.mean_abs_deg:>+9.3f}{saved:>8.0%}"
            )


if __name__ == "__main__":
    main()
