"""Time / mean / SD table of the disk map over the synthetic suite.

    python3 scripts/run_suite.py --sizes 1000 20000 [--json out.json] [--mesh extra.obj ...]
"""
import argparse
import json
import time
import warnings

from diskconf import synthetic
from diskconf.mesh import load_mesh
from diskconf.metrics import angular_distortion, bijectivity_report
from diskconf.pipeline import ParameterizationError, disk_conformal_parameterize
from diskconf.quasiconformal import ClampWarning


def run_one(name, mesh, skip=False):
    t = time.perf_counter()
    try:
        p = disk_conformal_parameterize(mesh, skip_south_pole=skip)
    except ParameterizationError as exc:
        return {"mesh": name, "F": mesh.num_faces, "error": str(exc)}
    dt = time.perf_counter() - t
    rep = angular_distortion(mesh, p)
    bij = bijectivity_report(mesh, p)
    return {
        "mesh": name,
        "V": mesh.num_vertices,
        "F": mesh.num_faces,
        "time_s": dt,
        "mean_abs_deg": rep.mean_abs_deg,
        "sd_abs_deg": rep.sd_abs_deg,
        "flips": bij.flips,
        "boundary_simple": bij.boundary_simple,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 20000])
    ap.add_argument("--mesh", nargs="*", default=[], help="extra OBJ/OFF meshes")
    ap.add_argument("--skip-south-pole", action="store_true")
    ap.add_argument("--json", help="also write the rows as JSON")
    args = ap.parse_args()
    warnings.simplefilter("ignore", ClampWarning)

    meshes = [(f"{name}-{n}", m) for (name, n), m in synthetic.suite(args.sizes).items()]
    meshes.append(("sliver_disk", synthetic.sliver_disk()))
    meshes += [(path, load_mesh(path)) for path in args.mesh]

    rows = []
    print(f"{'mesh':<24}{'V':>8}{'F':>8}{'time (s)':>10}{'mean':>8}{'SD':>8}{'flips':>7}")
    for name, mesh in meshes:
        r = run_one(name, mesh, args.skip_south_pole)
        rows.append(r)
        if "error" in r:
            print(f"{name:<24}{'':>8}{r['F']:>8}  {r['error']}")
        else:
            print(f"{name:<24}{r['V']:>8}{r['F']:>8}{r['time_s']:>10.3f}{r['mean_abs_deg']:>8.3f}{r['sd_abs_deg']:>8.3f}{r['flips']:>7}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
