"""Plain-text PBM/PGM images of spacetime grids, top row = highest n."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import UsageError
from .lca import MAX_CELLS, SpacetimeGrid

FORMATS = ("pbm", "pgm")


def _header_comment(grid: SpacetimeGrid) -> str:
    m0, m1, n0, n1 = grid.window
    return f"# p={grid.p} window={m0},{m1},{n0},{n1}"


def gray_levels(p: int) -> np.ndarray:
    """Gray level of each field value: 0 is white, p-1 is black."""
    v = np.arange(p)
    return (255 * (p - 1 - v)) // (p - 1)


def render_text(grid: SpacetimeGrid, fmt: str | None = None) -> str:
    fmt = fmt or ("pbm" if grid.p == 2 else "pgm")
    if fmt not in FORMATS:
        raise UsageError(f"unknown image format {fmt!r}")
    if grid.width * grid.height > MAX_CELLS:
        raise UsageError("grid too large to render")
    rows = grid.values[::-1]
    if fmt == "pbm":
        if grid.p != 2:
            raise UsageError("pbm needs p = 2; use pgm")
        head = ["P1", _header_comment(grid), f"{grid.width} {grid.height}"]
        body = ["".join("01"[v] for v in row) for row in rows.tolist()]
    else:
        if grid.p > 255:
            raise UsageError("pgm needs p <= 255")
        lv = gray_levels(grid.p)
        head = ["P2", _header_comment(grid), f"{grid.width} {grid.height}", "255"]
        body = [" ".join(map(str, lv[row].tolist())) for row in rows]
    return "\n".join(head + body) + "\n"


def render(grid: SpacetimeGrid, path, fmt: str | None = None) -> Path:
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower() or None
    path.write_text(render_text(grid, fmt))
    return path


def parse_image(text: str) -> SpacetimeGrid:
    """Inverse of render_text; the window and p come from the header comment."""
    lines = text.splitlines()
    if not lines or lines[0] not in ("P1", "P2"):
        raise UsageError("not a plain PBM/PGM image")
    meta = {}
    tokens = []
    for line in lines[1:]:
        if line.startswith("#"):
            for part in line[1:].split():
                if "=" in part:
                    k, v = part.split("=", 1)
                    meta[k] = v
        else:
            tokens.extend(line.split())
    if "p" not in meta or "window" not in meta:
        raise UsageError("image header lacks the p/window comment")
    p = int(meta["p"])
    m0, m1, n0, n1 = (int(t) for t in meta["window"].split(","))
    w, h = int(tokens[0]), int(tokens[1])
    if lines[0] == "P1":
        # P1 pixels may be packed without separators
        data = [int(c) for c in "".join(tokens[2:])]
        vals = np.array(data, dtype=np.uint8)
    else:
        lv = gray_levels(p)
        inv = {int(g): v for v, g in enumerate(lv.tolist())}
        vals = np.array([inv[int(t)] for t in tokens[3:]], dtype=np.uint8)
    if vals.size != w * h or w != m1 - m0 + 1 or h != n1 - n0 + 1:
        raise UsageError("image size does not match its window")
    return SpacetimeGrid(p, m0, m1, n0, n1, vals.reshape(h, w)[::-1].copy())


def read_image(path) -> SpacetimeGrid:
    return parse_image(Path(path).read_text())
