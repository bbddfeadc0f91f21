"""Text formats, independent solution verification, SVG rendering and CSV export.

Instance file: first non-comment line is the disk count ``n``, followed by
``n`` lines of one positive radius each. Lines starting with ``#`` are
comments.

Solution file: the container radius on the first line, then one ``x y`` line
per disk in the instance's sorted-radius order.
"""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass

import numpy as np

from pucc.core import InvalidInstanceError, Solution, make_instance

TRACE_COLUMNS = ["restart", "round", "iteration", "event", "energy", "best_energy"]
HISTORY_COLUMNS = ["step", "target_R", "feasible", "R", "elapsed_s", "slice_s"]
RESULT_COLUMNS = ["instance", "seed", "strategy", "best_R", "time_to_best_s", "feasible", "hit"]


class ParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _fmt(v: float) -> str:
    # shortest repr that round-trips exactly
    return repr(float(v))


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def load_instance(text: str, name: str = ""):
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty instance file")
    lineno, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise ParseError(f"expected a disk count, got {head!r}", lineno) from None
    if n < 1:
        raise ParseError(f"disk count must be positive, got {n}", lineno)
    body = lines[1:]
    radii = []
    for lineno, line in body[:n]:
        try:
            r = float(line)
        except ValueError:
            raise ParseError(f"expected a radius, got {line!r}", lineno) from None
        if not (math.isfinite(r) and r > 0):
            raise ParseError(f"radius must be positive and finite, got {line!r}", lineno)
        radii.append(r)
    if len(body) != n:
        where = body[n][0] if len(body) > n else None
        raise ParseError(f"expected {n} radii, found {len(body)}", where)
    try:
        return make_instance(radii, name=name)
    except InvalidInstanceError as exc:
        raise ParseError(str(exc)) from None


def write_instance(instance, comment: str = "") -> str:
    """Instance file text, radii in their original input order."""
    out = [f"# {comment}"] if comment else []
    out.append(str(instance.n))
    out.extend(_fmt(r) for r in instance.to_input_order(instance.radii))
    return "\n".join(out) + "\n"


def write_solution(solution: Solution) -> str:
    lines = [_fmt(solution.radius)]
    lines.extend(f"{_fmt(x)} {_fmt(y)}" for x, y in solution.pattern)
    return "\n".join(lines) + "\n"


def load_solution(text: str, instance) -> Solution:
    """Parse a solution file; the violation is recomputed, never read from the file."""
    lines = list(_content_lines(text))
    if len(lines) != instance.n + 1:
        raise ParseError(f"expected {instance.n + 1} lines for n={instance.n}, found {len(lines)}")
    try:
        R = float(lines[0][1])
    except ValueError:
        raise ParseError(f"expected a container radius, got {lines[0][1]!r}", lines[0][0]) from None
    centers = np.empty((instance.n, 2))
    for k, (lineno, line) in enumerate(lines[1:]):
        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError
            centers[k] = [float(parts[0]), float(parts[1])]
        except ValueError:
            raise ParseError(f"expected 'x y', got {line!r}", lineno) from None
    if not np.all(np.isfinite(centers)) or not math.isfinite(R):
        raise ParseError("non-finite value in solution")
    sol = Solution(R, centers, math.nan, instance.name)
    sol.max_violation = verify_solution(instance, sol).max_violation
    return sol


@dataclass(frozen=True)
class VerifyReport:
    feasible: bool
    max_violation: float
    worst: tuple  # ("pair", i, j), ("container", i) or () when nothing overlaps

    def __bool__(self):
        return self.feasible


def verify_solution(instance, solution: Solution, tol: float = 1e-9) -> VerifyReport:
    """Recompute every overlap from scratch and report the worst one."""
    c = np.asarray(solution.pattern, dtype=float)
    r = np.asarray(instance.radii, dtype=float)
    if c.shape != (len(r), 2):
        raise ValueError(f"solution has {len(c)} centers for {len(r)} disks")
    worst_v, worst = 0.0, ()
    wall = np.hypot(c[:, 0], c[:, 1]) + r - solution.radius
    i = int(np.argmax(wall))
    if wall[i] > worst_v:
        worst_v, worst = float(wall[i]), ("container", i)
    if len(r) > 1:
        iu, ju = np.triu_indices(len(r), k=1)
        depth = r[iu] + r[ju] - np.hypot(c[iu, 0] - c[ju, 0], c[iu, 1] - c[ju, 1])
        k = int(np.argmax(depth))
        if depth[k] > worst_v:
            worst_v, worst = float(depth[k]), ("pair", int(iu[k]), int(ju[k]))
    return VerifyReport(worst_v <= tol, worst_v, worst)


def render_svg(instance, solution: Solution, size: int = 600) -> str:
    R = float(solution.radius)
    half = 1.05 * R
    scale = size / (2 * half)

    def px(v):
        return f"{v * scale:.4f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{px(-half)} {px(-half)} {px(2 * half)} {px(2 * half)}">',
        f'<circle cx="0" cy="0" r="{px(R)}" fill="none" stroke="black" stroke-width="1.5"/>',
    ]
    for k, ((x, y), r) in enumerate(zip(solution.pattern, instance.radii)):
        # SVG y grows downward
        parts.append(
            f'<circle cx="{px(x)}" cy="{px(-y)}" r="{px(r)}" '
            f'fill="#9ecae1" fill-opacity="0.7" stroke="#08519c" stroke-width="1"/>'
        )
        font = max(6.0, min(14.0, r * scale * 0.8))
        parts.append(
            f'<text x="{px(x)}" y="{px(-y)}" font-size="{font:.1f}" text-anchor="middle" '
            f'dominant-baseline="central">{k}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _csv(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_trace_csv(records) -> str:
    rows = ([r.restart, r.round, r.iteration, r.event, _fmt(r.energy), _fmt(r.best_energy)] for r in records)
    return _csv(TRACE_COLUMNS, rows)


def write_history_csv(history) -> str:
    rows = (
        [k, _fmt(h.target_radius), int(h.feasible), _fmt(h.radius), f"{h.elapsed:.6f}", f"{h.time_slice:.6f}"]
        for k, h in enumerate(history)
    )
    return _csv(HISTORY_COLUMNS, rows)


def write_results_csv(rows) -> str:
    """``rows`` are dicts keyed by :data:`RESULT_COLUMNS`."""
    return _csv(RESULT_COLUMNS, ([row[c] for c in RESULT_COLUMNS] for row in rows))


def load_targets(text: str) -> dict:
    """Best-known radii keyed by instance name, from ``name radius`` lines."""
    targets = {}
    for lineno, line in _content_lines(text):
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"expected 'name radius', got {line!r}", lineno)
        try:
            targets[parts[0]] = float(parts[1])
        except ValueError:
            raise ParseError(f"bad radius {parts[1]!r}", lineno) from None
    return targets
