"""Parameter sweeps over q, mu, or the largest user count, with CSV output.

Every grid point yields one row with the optimal traffic, the worst
equilibrium traffic, the exact price of anarchy, the closed-form bound, and
the equilibrium count.  Two-source instances use the fast aggregate scan;
for three or more sources the equilibrium columns are filled only when the
profile space fits under the enumeration cap, otherwise they carry the "na"
marker.  Output is deterministic: identical specs produce byte-identical
files.
"""

from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import CapacityError, InvalidInputError
from .model import Instance, instance_from_json
from .equilibrium import poa_report

AXES = ("q", "mu", "n1")
OUTPUTS = ("tr_opt", "tr_worst_ne", "poa_exact", "poa_bound")
CSV_COLUMNS = ("axis_value", "tr_opt", "tr_worst_ne", "poa_exact", "poa_bound", "ne_count")
NA = "na"

THREADS_ENV = "LOSSNET_THREADS"


@dataclass(frozen=True)
class SweepSpec:
    base: Instance
    axis: str
    grid: tuple
    outputs: tuple[str, ...] = OUTPUTS

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise InvalidInputError(f"axis must be one of {AXES}, got {self.axis!r}")
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise InvalidInputError("grid must be non-empty")
        seen = []
        for o in self.outputs:
            if o not in OUTPUTS:
                raise InvalidInputError(f"unknown output {o!r}; choose from {OUTPUTS}")
            if o not in seen:
                seen.append(o)
        object.__setattr__(self, "outputs", tuple(seen))
        for g in self.grid:
            apply_axis(self.base, self.axis, g)  # validates the value's domain


def apply_axis(base: Instance, axis: str, value) -> Instance:
    """The base instance with one parameter replaced by a grid value."""
    if axis == "q":
        return Instance(base.user_counts, base.phi, base.mu, float(value))
    if axis == "mu":
        return Instance(base.user_counts, base.phi, float(value), base.q)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInputError(f"n1 grid values must be integers, got {value!r}")
    return Instance((value,) + base.user_counts[1:], base.phi, base.mu, base.q)


def spec_from_json(obj: dict) -> SweepSpec:
    if not isinstance(obj, dict):
        raise InvalidInputError("sweep spec must be a JSON object")
    for key in ("base", "axis", "grid"):
        if key not in obj:
            raise InvalidInputError(f"missing field '{key}'")
    base = instance_from_json(obj["base"])
    axis = obj["axis"]
    grid = obj["grid"]
    if not isinstance(grid, list):
        raise InvalidInputError("field 'grid' must be a list")
    outputs = tuple(obj.get("outputs", OUTPUTS))
    return SweepSpec(base=base, axis=axis, grid=tuple(grid), outputs=outputs)


def _row(spec: SweepSpec, value, cap: int) -> dict:
    inst = apply_axis(spec.base, spec.axis, value)
    row: dict[str, object] = {c: NA for c in CSV_COLUMNS}
    row["axis_value"] = value
    need_ne = bool({"tr_worst_ne", "poa_exact"} & set(spec.outputs))
    if need_ne:
        try:
            rep = poa_report(inst, cap=cap)
            row["ne_count"] = rep.ne_count
            if "tr_opt" in spec.outputs:
                row["tr_opt"] = rep.tr_opt
            if "tr_worst_ne" in spec.outputs and rep.tr_worst_ne is not None:
                row["tr_worst_ne"] = rep.tr_worst_ne
            if "poa_exact" in spec.outputs and rep.poa_exact is not None:
                row["poa_exact"] = rep.poa_exact
            if "poa_bound" in spec.outputs and rep.poa_bound is not None:
                row["poa_bound"] = rep.poa_bound
            return row
        except CapacityError:
            pass  # equilibrium columns stay "na"; fall through for the rest
    if "tr_opt" in spec.outputs:
        from .optimizer import solve_optimal

        row["tr_opt"] = solve_optimal(inst).tr
    if "poa_bound" in spec.outputs:
        from .equilibrium import mixing_level

        z = mixing_level(inst)
        if z > 0:
            n1 = max(inst.user_counts)
            row["poa_bound"] = 1.0 + n1 * inst.mu / (n1 * z * inst.phi + z * inst.mu)
    return row


def run_sweep(spec: SweepSpec, cap: int = 1_000_000, threads: int | None = None) -> list[dict]:
    """One row per grid point, in grid order regardless of completion order."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda g: _row(spec, g, cap), spec.grid))
    return [_row(spec, g, cap) for g in spec.grid]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        raise InvalidInputError("booleans are not CSV values")
    if isinstance(x, int):
        return str(x)
    return repr(float(x))  # shortest round-trip decimal


def rows_to_csv(rows: list[dict]) -> str:
    """Comma-separated, '.' decimal, header row, LF line endings."""
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def write_csv(rows: list[dict], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows), encoding="utf-8", newline="\n")


def emit_plot_data(
    spec: SweepSpec, rows: list[dict], outdir: str | Path, stem: str = "sweep"
) -> list[Path]:
    """Columnar series files plus a gnuplot script stub.

    One two-column file per requested output, headed by the exact output
    name; "na" marks missing points.  Regeneration from the same spec is
    byte-identical.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for out in spec.outputs:
        path = outdir / f"{stem}_{out}.dat"
        lines = [f"axis_value {out}"]
        for row in rows:
            lines.append(f"{_fmt(row['axis_value'])} {_fmt(row[out])}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        written.append(path)
    script = outdir / f"{stem}.gp"
    plot_lines = [
        f"set datafile missing '{NA}'",
        "set key autotitle columnhead",
        f"set xlabel '{spec.axis}'",
    ]
    for out in spec.outputs:
        plot_lines.append(f"plot '{stem}_{out}.dat' using 1:2 with lines")
        plot_lines.append("pause -1")
    script.write_text("\n".join(plot_lines) + "\n", encoding="utf-8", newline="\n")
    written.append(script)
    return written


def figure_presets() -> dict[str, SweepSpec]:
    """Built-in sweep presets for the bundled experiments.

    q_sweep:        q in [0, 1] (101 points), counts (1000, 100), mu = 300.
    mu_sweep:       mu log-spaced over [1, 6000] (60 points), q = 0.3.
    n1_sweep:       n1 in 500..8000 step 100, q = 0.7, mu = 10.  The endpoint
                    price of anarchy sits within 0.005 of 1 at this mu.
    n1_sweep_m3:    three sources, counts (n1, 8, 4), mu = 1, q = 0.3,
                    n1 in 12..60 step 4; optimum-only outputs.
    """
    two = Instance((1000, 100), 1.0, 300.0, 0.3)
    q_grid = tuple(round(i / 100, 2) for i in range(101))
    mu_grid = tuple(float(f"{10 ** (i / 59 * 3.778151):.6g}") for i in range(60))
    n1_grid = tuple(range(500, 8001, 100))
    n1_m3_grid = tuple(range(12, 61, 4))
    return {
        "q_sweep": SweepSpec(base=two, axis="q", grid=q_grid),
        "mu_sweep": SweepSpec(
            base=Instance((1000, 100), 1.0, 300.0, 0.3), axis="mu", grid=mu_grid
        ),
        "n1_sweep": SweepSpec(
            base=Instance((1000, 100), 1.0, 10.0, 0.7), axis="n1", grid=n1_grid
        ),
        "n1_sweep_m3": SweepSpec(
            base=Instance((12, 8, 4), 1.0, 1.0, 0.3),
            axis="n1",
            grid=n1_m3_grid,
            outputs=("tr_opt", "poa_bound"),
        ),
    }
