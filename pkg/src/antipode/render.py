"""Rasters of dynamical planes and parameter planes.

Pixels are classified by the numba kernels in :mod:`antipode.dynamics`.
Work is split into row tiles run on a thread pool (the kernels release
the GIL); each tile writes only its own rows, so the result does not
depend on scheduling.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numba as nb
import numpy as np

from .dynamics import (
    _fate,
    _mean_rotation,
    _param_code,
    _f,
    _kappa,
    ParamType,
    trap_radius,
)

__all__ = [
    "Projection",
    "Viewport",
    "PlaneImage",
    "DEFAULT_PALETTE",
    "load_palette",
    "default_threads",
    "grid_points",
    "classify_points",
    "render_julia",
    "render_param",
    "estimate_rotation_hue",
    "write_ppm",
]

# pixel codes
J_ZERO, J_INF, J_CYCLE, J_UNDECIDED = 0, 1, 2, 3
OFF_IMAGE = 255

JULIA_NAMES = {J_ZERO: "BasinZero", J_INF: "BasinInfinity", J_CYCLE: "AttractingCycle",
               J_UNDECIDED: "Undecided", OFF_IMAGE: "Background"}
PARAM_NAMES = {i: t.value for i, t in enumerate(
    [ParamType.CENTRAL, ParamType.CAPTURE_ZERO, ParamType.CAPTURE_INFINITY,
     ParamType.MANDELBROT, ParamType.TRICORN, ParamType.HERMAN])}
PARAM_NAMES[OFF_IMAGE] = "Background"

# white / grey / black scheme; keys are the class names above
DEFAULT_PALETTE = {
    "julia": {
        "BasinZero": [255, 255, 255],
        "BasinInfinity": [90, 90, 90],
        "AttractingCycle": [170, 170, 170],
        "Undecided": [0, 0, 0],
        "Background": [255, 255, 255],
    },
    "param": {
        "Central": [255, 255, 255],
        "CaptureZero": [235, 235, 235],
        "CaptureInfinity": [110, 110, 110],
        "MandelbrotType": [60, 60, 60],
        "TricornType": [160, 160, 160],
        "HermanCandidate": [0, 0, 0],
        "Background": [255, 255, 255],
    },
}


def load_palette(path: str | os.PathLike | None) -> dict:
    """Palette from a JSON file with the layout of DEFAULT_PALETTE (missing keys default)."""
    pal = json.loads(json.dumps(DEFAULT_PALETTE))
    if path:
        user = json.loads(Path(path).read_text())
        for k, v in user.items():
            pal.setdefault(k, {}).update(v)
    return pal


def default_threads() -> int:
    env = os.environ.get("ANTIPODE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class Projection(Enum):
    PLANE = "plane"
    SPHERE = "sphere"
    CIRCLED = "circled"


@dataclass(frozen=True)
class Viewport:
    """Center and half-extent of the view.

    For PLANE these are in the complex coordinate itself.  For SPHERE and
    CIRCLED they are in image-disk coordinates, where the whole picture
    is the unit disk (center 0, half-extent 1).
    """

    center: complex = 0j
    half_extent: complex = 2 + 2j

    @classmethod
    def square(cls, center: complex = 0j, half: float = 2.0) -> "Viewport":
        return cls(complex(center), complex(half, half))


def grid_points(width: int, height: int, viewport: Viewport,
                projection: Projection = Projection.PLANE):
    """Sample point of every pixel center, row-major, row 0 at the top.

    Returns ``(points, mask)`` as 2-d arrays.  ``mask`` is False for
    pixels outside the image disk of the SPHERE and CIRCLED views.
    Offsets are built from integer numerators so that the grid is
    exactly symmetric about the center.
    """
    hx, hy = viewport.half_extent.real, viewport.half_extent.imag
    u = (2.0 * np.arange(width) + 1.0 - width) / width * hx
    v = -(2.0 * np.arange(height) + 1.0 - height) / height * hy
    U, V = np.meshgrid(u, v)
    W = viewport.center + U + 1j * V
    mask = np.ones(W.shape, dtype=bool)
    if projection is Projection.PLANE:
        return W, mask
    r = np.abs(W)
    mask = r < 1.0
    if projection is Projection.CIRCLED:
        # inverse of r -> r / sqrt(1 + r^2)
        with np.errstate(divide="ignore", invalid="ignore"):
            R = r / np.sqrt(np.where(mask, 1.0 - r * r, 1.0))
            Z = np.where(r > 0, W / np.where(r > 0, r, 1.0) * R, 0j)
        return np.where(mask, Z, 0j), mask
    # orthonormal view of the hemisphere X >= 0, with 0 at the bottom and infinity at the top
    Y, Zs = W.real, W.imag
    X = np.sqrt(np.clip(1.0 - Y * Y - Zs * Zs, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        Z = (X + 1j * Y) / (1.0 - Zs)
    return np.where(mask, Z, 0j), mask


@nb.njit(cache=True, nogil=True)
def _julia_tile(q, pts, mask, out, budget, trap, tol):
    for i in range(pts.shape[0]):
        if not mask[i]:
            out[i] = 255
            continue
        z = pts[i]
        if z == 0:
            out[i] = 0
            continue
        kind, _, _, _ = _fate(q, z, budget, trap, tol)
        out[i] = kind


@nb.njit(cache=True, nogil=True)
def _cycle_rotation(q, z, p):
    """k/p as a float, where f moves each cycle point k places in argument order."""
    if p <= 1:
        return 0.0
    args = np.empty(p)
    pts = np.empty(p, dtype=np.complex128)
    for i in range(p):
        pts[i] = z
        args[i] = math.atan2(z.imag, z.real)
        z = _f(q, z)
    order = np.argsort(args)
    pos = np.empty(p, dtype=np.int64)
    for r in range(p):
        pos[order[r]] = r
    k = (pos[1 % p] - pos[0]) % p
    for i in range(p):
        if (pos[(i + 1) % p] - pos[i]) % p != k:
            return -1.0
    return k / p


@nb.njit(cache=True, nogil=True)
def _param_tile(pts, mask, out, hue, budget, eps, tol, nseg, want_hue, herman_n):
    for i in range(pts.shape[0]):
        hue[i] = -1.0
        if not mask[i]:
            out[i] = 255
            continue
        q = pts[i]
        if q == 0:
            out[i] = 0
            continue
        code, p = _param_code(q, budget, eps, tol, nseg)
        out[i] = code
        if not want_hue:
            continue
        if code == 4:
            z = _kappa(abs(q) ** 2) * q
            trap = min(eps, 0.25 / (1.0 + abs(q)))
            _, _, z, _ = _fate(q, z, budget, trap, tol)
            for _ in range(64 * p):
                z = _f(q, z)
            hue[i] = _cycle_rotation(q, z, p)
        elif code == 5:
            z = _kappa(abs(q) ** 2) * q
            for _ in range(budget):
                z = _f(q, z)
            hue[i] = _mean_rotation(q, z, herman_n)


def _tiles(n_rows: int, threads: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(n_rows / max(1, 4 * threads)))
    return [(r, min(n_rows, r + size)) for r in range(0, n_rows, size)]


def _run_tiles(fn, n_rows: int, threads: int):
    tiles = _tiles(n_rows, threads)
    if threads <= 1:
        for a, b in tiles:
            fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(lambda t: fn(*t), tiles))


def classify_points(q: complex, zs, budget: int = 5000, eps: float = 1e-3,
                    tol: float = 1e-9) -> np.ndarray:
    """Julia pixel codes (0 basin of 0, 1 basin of infinity, 2 cycle, 3 undecided) for points."""
    zs = np.ascontiguousarray(np.asarray(zs, dtype=np.complex128).ravel())
    out = np.empty(zs.shape, dtype=np.uint8)
    q = complex(q)
    _julia_tile(q, zs, np.ones(zs.shape, dtype=np.bool_), out, budget, trap_radius(q, eps), tol)
    return out


@dataclass
class PlaneImage:
    """A classified raster plus everything needed to reproduce it."""

    width: int
    height: int
    viewport: Viewport
    projection: Projection
    kind: str
    codes: np.ndarray
    hue: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def names(self) -> dict:
        return JULIA_NAMES if self.kind == "julia" else PARAM_NAMES

    def counts(self) -> dict:
        vals, cnt = np.unique(self.codes, return_counts=True)
        nm = self.names()
        return {nm[int(v)]: int(c) for v, c in zip(vals, cnt)}

    def to_rgb(self, palette: dict | None = None) -> np.ndarray:
        pal = (palette or DEFAULT_PALETTE)["julia" if self.kind == "julia" else "param"]
        lut = np.zeros((256, 3), dtype=np.uint8)
        for code, name in self.names().items():
            lut[code] = pal[name]
        rgb = lut[self.codes]
        if self.hue is not None:
            sel = self.hue >= 0
            rgb[sel] = _hue_rgb(self.hue[sel])
        return rgb

    def save(self, path: str | os.PathLike, palette: dict | None = None) -> Path:
        """Write a P6 PPM and a JSON sidecar ``<path>.json``; returns the sidecar path."""
        path = Path(path)
        write_ppm(path, self.to_rgb(palette))
        side = path.with_suffix(path.suffix + ".json")
        info = dict(self.meta)
        info.update(
            width=self.width, height=self.height, kind=self.kind,
            projection=self.projection.value,
            viewport={"center": [self.viewport.center.real, self.viewport.center.imag],
                      "half_extent": [self.viewport.half_extent.real, self.viewport.half_extent.imag]},
            palette=palette or DEFAULT_PALETTE,
            counts=self.counts(),
            git_describe=_git_describe(),
        )
        side.write_text(json.dumps(info, indent=2, sort_keys=True))
        return side


def _hue_rgb(h: np.ndarray) -> np.ndarray:
    """Fully saturated colour for rotation number h in [0, 1): red at 0 through to blue at 1."""
    h = np.asarray(h) * (2.0 / 3.0)
    r = np.clip(np.abs(6 * h - 3) - 1, 0, 1)
    g = np.clip(2 - np.abs(6 * h - 2), 0, 1)
    b = np.clip(2 - np.abs(6 * h - 4), 0, 1)
    return (np.stack([r, g, b], axis=-1) * 255 + 0.5).astype(np.uint8)


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).parent)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def write_ppm(path: str | os.PathLike, rgb: np.ndarray) -> None:
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def render_julia(q: complex, width: int = 512, height: int = 512, viewport: Viewport | None = None,
                 projection: Projection = Projection.PLANE, budget: int = 5000, eps: float = 1e-3,
                 tol: float = 1e-9, threads: int | None = None) -> PlaneImage:
    """Classify every pixel of the dynamical plane of f_q by the fate of its orbit."""
    q = complex(q)
    viewport = viewport or (Viewport.square(0j, 2.0) if projection is Projection.PLANE
                            else Viewport.square(0j, 1.0))
    threads = threads or default_threads()
    Z, M = grid_points(width, height, viewport, projection)
    codes = np.empty(Z.shape, dtype=np.uint8)
    trap = trap_radius(q, eps)

    def work(a, b):
        out = np.empty((b - a) * width, dtype=np.uint8)
        _julia_tile(q, np.ascontiguousarray(Z[a:b].ravel()), np.ascontiguousarray(M[a:b].ravel()),
                    out, budget, trap, tol)
        codes[a:b] = out.reshape(b - a, width)

    _run_tiles(work, height, threads)
    meta = {"q": [q.real, q.imag], "budget": budget, "eps": eps, "tol": tol}
    return PlaneImage(width, height, viewport, projection, "julia", codes, None, meta)


def render_param(plane: str = "q", coloring: str = "component", width: int = 512, height: int = 512,
                 viewport: Viewport | None = None, projection: Projection = Projection.PLANE,
                 budget: int = 2000, eps: float = 1e-3, tol: float = 1e-9, nseg: int = 8,
                 herman_samples: int = 2000, threads: int | None = None) -> PlaneImage:
    """Classify parameters by the fate of the free critical point.

    Parameters
    ----------
    plane : {"q", "q2"}
        Whether pixels are values of q or of q^2.  In the q^2 plane the
        principal square root is used; q and -q give conjugate maps.
    coloring : {"component", "rotation"}
        Component types only, or additionally a hue for the rotation
        number of self-antipodal cycles and Herman candidates.
    """
    if plane not in ("q", "q2"):
        raise ValueError("plane must be 'q' or 'q2'")
    if coloring not in ("component", "rotation"):
        raise ValueError("coloring must be 'component' or 'rotation'")
    viewport = viewport or (Viewport.square(0j, 4.0) if projection is Projection.PLANE
                            else Viewport.square(0j, 1.0))
    threads = threads or default_threads()
    W, M = grid_points(width, height, viewport, projection)
    Q = np.sqrt(W) if plane == "q2" else W
    codes = np.empty(W.shape, dtype=np.uint8)
    hue = np.full(W.shape, -1.0)
    want = coloring == "rotation"

    def work(a, b):
        n = (b - a) * width
        out = np.empty(n, dtype=np.uint8)
        hh = np.empty(n)
        _param_tile(np.ascontiguousarray(Q[a:b].ravel()), np.ascontiguousarray(M[a:b].ravel()),
                    out, hh, budget, eps, tol, nseg, want, herman_samples)
        codes[a:b] = out.reshape(b - a, width)
        hue[a:b] = hh.reshape(b - a, width)

    _run_tiles(work, height, threads)
    meta = {"plane": plane, "coloring": coloring, "budget": budget, "eps": eps, "tol": tol,
            "nseg": nseg, "herman_samples": herman_samples}
    return PlaneImage(width, height, viewport, projection, "param", codes, hue if want else None, meta)


def estimate_rotation_hue(q: complex, budget: int = 2000, eps: float = 1e-3, tol: float = 1e-9,
                          herman_samples: int = 20000) -> float | None:
    """Rotation number used for colouring, or None for basin-type parameters.

    Self-antipodal attracting cycles give their combinatorial rotation
    number.  Herman candidates give the mean argument advance of the
    critical orbit, a heuristic for the ring's rotation number.  A
    self-antipodal cycle whose points are not rotated rigidly about 0
    (as in many tricorn components away from the tongues) gets None.
    """
    pts = np.array([complex(q)])
    out = np.empty(1, dtype=np.uint8)
    hh = np.empty(1)
    _param_tile(pts, np.ones(1, dtype=np.bool_), out, hh, budget, eps, tol, 8, True, herman_samples)
    return None if hh[0] < 0 else float(hh[0])
