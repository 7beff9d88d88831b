"""Visual-query evaluation: filter strings, box/lasso selection,
probabilistic subsampling, and deterministic replay of saved selections.

Filter-string grammar (version 1, canonical form):

    expr    := clause ("; " clause)*          -- may be empty
    clause  := axis " " levels | axis " [" lo "," hi "]"
    levels  := int ("," int)*                 -- categorical, parameters only
    axis    := one of the seven parameter names, or dshock/dedge/drho

Canonical serialization orders clauses by axis declaration order and
sorts categorical levels ascending, so parse(serialize(f)) == f and
serialize(parse(s)) is idempotent on its own output.

Selection boundaries are inclusive on both box edges and lasso edges:
reproducibility matters more than convention here.
"""

from __future__ import annotations

import hashlib
import struct

from .errors import (
    DegeneratePolygon,
    DuplicateAxis,
    InvalidProbability,
    InvertedRect,
    MalformedClause,
    StaleRecords,
    UnknownAxis,
)
from .model import (
    BoxGeometry,
    CategoricalClause,
    Clause,
    DELTA_AXES,
    FILTER_AXES,
    FilterExpr,
    LassoGeometry,
    PARAM_NAMES,
    RangeClause,
    SelectionSpec,
)

# ---------------------------------------------------------------------------
# Filter grammar


def serialize_filter(f: FilterExpr) -> str:
    parts = []
    for c in f.clauses:
        if isinstance(c, CategoricalClause):
            levels = ",".join(str(v) for v in sorted(c.levels))
            parts.append(f"{c.name} {levels}")
        else:
            parts.append(f"{c.axis} [{c.lo!r},{c.hi!r}]")
    return "; ".join(parts)


def _parse_clause(text: str, offset: int, axes) -> Clause:
    stripped = text.strip()
    if not stripped:
        raise MalformedClause("empty clause", offset)
    pad = offset + (len(text) - len(text.lstrip()))
    try:
        axis, rest = stripped.split(None, 1)
    except ValueError:
        raise MalformedClause(f"clause {stripped!r} has no value part", pad) from None
    if axis not in axes:
        raise UnknownAxis(f"unknown axis {axis!r} (at position {pad})")
    rest = rest.strip()
    if rest.startswith("["):
        if not rest.endswith("]"):
            raise MalformedClause(f"unterminated range in {stripped!r}", pad)
        body = rest[1:-1]
        pieces = body.split(",")
        if len(pieces) != 2:
            raise MalformedClause(f"range needs exactly two bounds in {stripped!r}", pad)
        try:
            lo, hi = float(pieces[0]), float(pieces[1])
        except ValueError:
            raise MalformedClause(f"non-numeric range bound in {stripped!r}", pad) from None
        if lo > hi:
            raise MalformedClause(f"range lo > hi in {stripped!r}", pad)
        return RangeClause(axis, lo, hi)
    if axis in DELTA_AXES:
        raise MalformedClause(
            f"axis {axis!r} is continuous; use a [lo,hi] range", pad
        )
    levels = set()
    for tok in rest.split(","):
        tok = tok.strip()
        if not tok:
            raise MalformedClause(f"empty level in {stripped!r}", pad)
        try:
            v = int(tok)
        except ValueError:
            raise MalformedClause(
                f"non-integer level {tok!r} in {stripped!r}", pad
            ) from None
        if v < 0:
            raise MalformedClause(f"negative level {v} in {stripped!r}", pad)
        levels.add(v)
    return CategoricalClause(axis, frozenset(levels))


def parse_filter(s: str, axes=FILTER_AXES) -> FilterExpr:
    """Parse a filter string; empty/whitespace input matches everything."""
    if not s.strip():
        return FilterExpr((), axes)
    clauses = []
    seen = set()
    offset = 0
    for chunk in s.split(";"):
        clause = _parse_clause(chunk, offset, axes)
        axis = clause.name if isinstance(clause, CategoricalClause) else clause.axis
        if axis in seen:
            raise DuplicateAxis(f"axis {axis!r} appears twice (at position {offset})")
        seen.add(axis)
        clauses.append(clause)
        offset += len(chunk) + 1
    return FilterExpr(tuple(clauses), axes)


def apply_filter(rows: list[dict], f: FilterExpr) -> list[dict]:
    """Rows for which every clause holds.  Rows must carry all named axes."""
    out = []
    for row in rows:
        keep = True
        for c in f.clauses:
            axis = c.name if isinstance(c, CategoricalClause) else c.axis
            if axis not in row:
                raise UnknownAxis(f"row is missing axis {axis!r}")
            value = row[axis]
            if isinstance(c, CategoricalClause):
                if value not in c.levels:
                    keep = False
                    break
            else:
                if value is None or not (c.lo <= value <= c.hi):
                    keep = False
                    break
        if keep:
            out.append(row)
    return out


# ---------------------------------------------------------------------------
# Scatter geometry


def scatter_points(rows: list[dict], w_shock: float, w_edge: float) -> list[dict]:
    """Valid rows mapped to scatter points: x = combined feature distance,
    y = density distance.  Rows flagged invalid are excluded."""
    points = []
    for row in rows:
        if row.get("invalid"):
            continue
        points.append(
            {
                "sim_id": row["sim_id"],
                "x": w_shock * row["dshock"] + w_edge * row["dedge"],
                "y": row["drho"],
                **{name: row[name] for name in PARAM_NAMES if name in row},
            }
        )
    return points


def select_box(points: list[dict], rect: BoxGeometry) -> set[str]:
    if rect.x_min > rect.x_max or rect.y_min > rect.y_max:
        raise InvertedRect(
            f"box has min > max: ({rect.x_min}, {rect.x_max}) /"
            f" ({rect.y_min}, {rect.y_max})"
        )
    return {
        p["sim_id"]
        for p in points
        if rect.x_min <= p["x"] <= rect.x_max and rect.y_min <= p["y"] <= rect.y_max
    }


def _on_segment(px, py, ax, ay, bx, by) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def point_in_polygon(x: float, y: float, vertices) -> bool:
    """Even-odd (ray casting) test; points exactly on an edge count inside."""
    n = len(vertices)
    inside = False
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        if _on_segment(x, y, ax, ay, bx, by):
            return True
        if (ay <= y < by) or (by <= y < ay):
            # x-coordinate where the edge crosses the horizontal ray
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def _polygon_degenerate(vertices) -> bool:
    (ax, ay) = vertices[0]
    for i in range(1, len(vertices) - 1):
        (bx, by) = vertices[i]
        (cx, cy) = vertices[i + 1]
        if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) != 0.0:
            return False
    return True


def select_lasso(points: list[dict], polygon: LassoGeometry) -> set[str]:
    verts = polygon.vertices
    if len(verts) < 3 or _polygon_degenerate(verts):
        raise DegeneratePolygon("lasso polygon has no area")
    return {
        p["sim_id"] for p in points if point_in_polygon(p["x"], p["y"], verts)
    }


def select_geometry(points: list[dict], geometry) -> set[str]:
    if isinstance(geometry, BoxGeometry):
        return select_box(points, geometry)
    return select_lasso(points, geometry)


# ---------------------------------------------------------------------------
# Subsampling


def _keep_fraction(seed: int, sim_id: str) -> float:
    """Deterministic uniform in [0, 1) from (seed, sim_id); order-independent."""
    key = struct.pack("<Q", seed & 0xFFFFFFFFFFFFFFFF)
    digest = hashlib.blake2b(sim_id.encode("utf-8"), digest_size=8, key=key).digest()
    return struct.unpack("<Q", digest)[0] / 2.0**64


def subsample(ids, p: float, seed: int) -> list[str]:
    """Independent Bernoulli(p) keep-decision per id; input order preserved."""
    if not (0.0 < p <= 1.0):
        raise InvalidProbability(f"subsample probability must be in (0, 1], got {p}")
    return [sim_id for sim_id in ids if _keep_fraction(seed, sim_id) < p]


# ---------------------------------------------------------------------------
# Replay


def replay(spec: SelectionSpec, store) -> set[str]:
    """Recompute a saved selection's membership purely from stored records."""
    store.get_method(spec.method_id)  # NotFound if the method is gone
    rows = store.query_records(spec.method_id, spec.time_step)
    if not rows:
        raise StaleRecords(
            f"no post-processed records for method {spec.method_id}"
            f" at time step {spec.time_step}"
        )
    rows = apply_filter(rows, spec.filter)
    points = scatter_points(rows, spec.w_shock, spec.w_edge)
    selected = select_geometry(points, spec.geometry)
    kept = subsample(sorted(selected), spec.subsample_p, spec.subsample_seed)
    return set(kept)
