"""CSV files for branches, trajectories and tables.

Every file starts with ``# format=1``; further ``#`` lines hold ``key=value``
metadata, then comes one header row and the data rows.  Floats are written
with 17 significant digits so that a round trip is exact.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .contour import SheetState
from .continuation import Branch
from .steady import ParamPoint

FORMAT_LINE = "# format=1"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_table(out: TextIO, header: Sequence[str], rows: Iterable[Sequence],
                meta: Mapping[str, object] | None = None) -> None:
    out.write(FORMAT_LINE + "\n")
    if meta:
        out.write("# " + " ".join(f"{k}={fmt(v)}" for k, v in meta.items()) + "\n")
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def _parse(field: str) -> float:
    flag = {"true": 1.0, "false": 0.0}.get(field.strip())
    return flag if flag is not None else float(field)


def read_table(source: str | Path | TextIO) -> tuple[dict, list[str], np.ndarray]:
    """Parse a file written by :func:`write_table` into ``(meta, header, data)``.

    Boolean fields come back as ``1.0`` and ``0.0``.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != FORMAT_LINE:
        raise ValueError("missing '# format=1' line")
    meta: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        for item in lines[i][1:].split():
            key, _, value = item.partition("=")
            meta[key] = value
        i += 1
    if i >= len(lines):
        raise ValueError("missing header row")
    header = lines[i].split(",")
    rows = [[_parse(v) for v in ln.split(",")] for ln in lines[i + 1:]]
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return meta, header, data


def branch_filename(branch: Branch) -> str:
    p = branch.point
    return f"branch_{p.kind}_{p.m}_{p.sign_label}.csv"


def branch_header(N: int) -> list[str]:
    return (["s", "param", "residual", "newton_iters"]
            + [f"eta_{n}" for n in range(1, N + 1)] + [f"psi_{n}" for n in range(1, N + 1)])


def branch_meta(branch: Branch) -> dict:
    p = branch.point
    return {"kind": p.kind, "m": p.m, "sign": p.sign_label, "N": branch.N, "Q": branch.Q,
            "c": p.params.c, "sigma": p.params.sigma, "gamma": p.params.gamma,
            "threshold": p.value, "direction": branch.direction}


def write_branch(branch: Branch, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / branch_filename(branch)
    buf = io.StringIO()
    rows = ([st.s, st.param_value, st.residual_norm, st.newton_iters, *st.state.to_vector()]
            for st in branch.steps)
    write_table(buf, branch_header(branch.N), rows, branch_meta(branch))
    path.write_text(buf.getvalue())
    return path


@dataclass(frozen=True, eq=False)
class BranchRecord:
    """A branch read back from disk."""

    kind: str
    m: int
    N: int
    Q: int
    base: ParamPoint
    s: np.ndarray
    param: np.ndarray
    residual: np.ndarray
    newton_iters: np.ndarray
    coeffs: np.ndarray

    def __len__(self) -> int:
        return self.s.size

    def state(self, row: int) -> SheetState:
        return SheetState.from_vector(self.m, self.coeffs[row])

    def params(self, row: int) -> ParamPoint:
        return self.base.with_value(self.kind, self.param[row])


def read_branch(path: str | Path) -> BranchRecord:
    meta, header, data = read_table(path)
    try:
        kind, m, N = meta["kind"], int(meta["m"]), int(meta["N"])
        base = ParamPoint(float(meta["c"]), float(meta["sigma"]), float(meta["gamma"]))
        Q = int(meta.get("Q", 0))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: incomplete branch metadata ({exc})") from None
    if header != branch_header(N):
        raise ValueError(f"{path}: unexpected header")
    return BranchRecord(kind, m, N, Q, base, data[:, 0], data[:, 1], data[:, 2],
                        data[:, 3].astype(int), data[:, 4:])


def trajectory_header(N: int) -> list[str]:
    cols = ["t"]
    for name in ("eta", "psi"):
        cols += [f"{name}_re_{n}" for n in range(1, N + 1)]
        cols += [f"{name}_im_{n}" for n in range(1, N + 1)]
    return cols
