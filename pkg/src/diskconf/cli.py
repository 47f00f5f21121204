"""Command-line interface: ``param``, ``metrics`` and ``texture`` subcommands."""
from __future__ import annotations

import argparse
import colorsys
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .linalg import DEFAULT_TOL, SolverError
from .mesh import MeshError, load_mesh, load_uv, write_mesh_with_uv
from .metrics import bijectivity_report, evaluate
from .pipeline import ParameterizationError, disk_conformal_parameterize

MAX_TOL = 1e-4


@dataclass
class RunConfig:
    input: Path
    output: Optional[Path] = None
    format: str = "auto"
    skip_south_pole: bool = False
    tol: float = DEFAULT_TOL
    report: str = "text"
    texture: str = "none"
    density: int = 8
    uv: Optional[Path] = None

    def __post_init__(self):
        if not 0 < self.tol <= MAX_TOL:
            raise ValueError(f"tolerance must be in (0, {MAX_TOL:g}], got {self.tol:g}")
        if self.density < 1:
            raise ValueError(f"checkerboard density must be >= 1, got {self.density}")
        if self.report not in ("text", "json"):
            raise ValueError(f"unknown report format {self.report!r}")
        if self.texture not in ("none", "checkerboard"):
            raise ValueError(f"unknown texture mode {self.texture!r}")


def _fail(stage: str, message: str, faces=None) -> int:
    msg = f"error [{stage}]: {message}"
    if faces is not None and len(faces):
        msg += f" (faces: {np.asarray(faces)[:20].tolist()}{' ...' if len(faces) > 20 else ''})"
    print(msg, file=sys.stderr)
    return 1


def _emit(report: dict, text: str, fmt: str):
    print(json.dumps(report, indent=2) if fmt == "json" else text)


def _parameterize(cfg: RunConfig):
    mesh = load_mesh(cfg.input, cfg.format)
    param = disk_conformal_parameterize(mesh, skip_south_pole=cfg.skip_south_pole, tol=cfg.tol)
    return mesh, param


def _param_report(param):
    rep = evaluate(param.mesh, param)
    d = rep.to_dict()
    prov = param.provenance
    d["provenance"] = {
        "anchor_face": prov["anchor_face"],
        "skip_south_pole": prov["skip_south_pole"],
        "tol": prov["tol"],
        "clamped_faces": prov["clamped_faces"],
        "num_solves": prov["num_systems"],
    }
    text = rep.to_text() + f"\nanchor_face {prov['anchor_face']}\nskip_south_pole {prov['skip_south_pole']}\nnum_solves {prov['num_systems']}"
    return d, text


def cmd_param(cfg: RunConfig) -> int:
    if cfg.output is None:
        return _fail("config", "--out is required")
    try:
        mesh, param = _parameterize(cfg)
    except ParameterizationError as exc:
        return _fail(exc.stage, str(exc), exc.faces)
    except (MeshError, SolverError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc))
    write_mesh_with_uv(cfg.output, mesh, param.uv)
    _emit(*_param_report(param), cfg.report)
    return 0


def cmd_metrics(cfg: RunConfig) -> int:
    if cfg.uv is None:
        return _fail("config", "--uv is required")
    try:
        mesh = load_mesh(cfg.input, cfg.format)
        uv = load_uv(cfg.uv, mesh)
    except (MeshError, OSError, ValueError) as exc:
        return _fail("input", str(exc))
    rep = evaluate(mesh, uv)
    bij = bijectivity_report(mesh, uv)
    d = rep.to_dict()
    d["boundary_simple"] = bij.boundary_simple
    _emit(d, rep.to_text() + f"\nboundary_simple {bij.boundary_simple}", cfg.report)
    return 0


def checkerboard_image(size: int = 512, cells: int = 8):
    """Square rainbow checkerboard: hue runs along the diagonal, cells alternate brightness."""
    from PIL import Image

    t = (np.arange(size) + 0.5) / size
    x, y = np.meshgrid(t, t)
    hue = (x + y) / 2.0
    light = ((np.floor(x * cells) + np.floor(y * cells)) % 2 == 0)
    rgb = np.array([colorsys.hsv_to_rgb(h, 0.85, 1.0) for h in hue.ravel()]).reshape(size, size, 3)
    rgb[~light] *= 0.35
    return Image.fromarray((rgb * 255).round().astype(np.uint8), "RGB")


def cmd_texture(cfg: RunConfig) -> int:
    if cfg.output is None:
        return _fail("config", "--out is required")
    try:
        mesh, param = _parameterize(cfg)
    except ParameterizationError as exc:
        return _fail(exc.stage, str(exc), exc.faces)
    except (MeshError, SolverError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc))
    out = Path(cfg.output)
    mtl, png = out.with_suffix(".mtl"), out.with_suffix(".png")
    checkerboard_image().save(png)
    mtl.write_text(f"newmtl checkerboard\nKa 1 1 1\nKd 1 1 1\nmap_Kd {png.name}\n")
    # disk [-1, 1]^2 -> [0, 1]^2, then tiled `density` times
    tex = cfg.density * (param.uv + (1 + 1j)) / 2
    write_mesh_with_uv(out, mesh, tex, mtllib=mtl.name, material="checkerboard")
    _emit(*_param_report(param), cfg.report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diskconf", description="Disk conformal parameterization of open triangle meshes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--in", dest="input", required=True, type=Path, help="input mesh (OBJ or OFF)")
        if out:
            p.add_argument("--out", dest="output", required=True, type=Path, help="output OBJ with vt records")
        p.add_argument("--format", default="auto", choices=["auto", "obj", "off"])
        p.add_argument("--report", default="text", choices=["text", "json"])

    p = sub.add_parser("param", help="parameterize a disk-topology mesh")
    common(p)
    p.add_argument("--skip-south-pole", action="store_true", help="skip the South-pole correction")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative residual tolerance, in (0, 1e-4]")

    p = sub.add_parser("metrics", help="distortion report of an existing uv map")
    common(p, out=False)
    p.add_argument("--uv", required=True, type=Path, help="OBJ with vt records over the same faces")

    p = sub.add_parser("texture", help="parameterize and export a checkerboard-textured OBJ")
    common(p)
    p.add_argument("--skip-south-pole", action="store_true")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--density", type=int, default=8, help="checkerboard repetitions across the disk (>= 1)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        cfg = RunConfig(texture="checkerboard" if args.command == "texture" else "none", **fields)
    except ValueError as exc:
        ap.error(str(exc))
    return {"param": cmd_param, "metrics": cmd_metrics, "texture": cmd_texture}[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
