"""Instance and candidate-store files, plus synthetic instance generation.

Both formats are line-oriented text.  Floats are written with ``repr``,
whose shortest-decimal output round-trips every double exactly, so
save -> load is the identity and stores diff cleanly.
"""

from __future__ import annotations

import random
from pathlib import Path

import numpy as np

from .core import Candidate, Instance, Sequence, pickup_probability, travel_cost_direct
from .errors import InvariantError, ParseError, StoreMismatchError
from .growth import IP_ONLY, IP_PLUS_BATCH, CandidateStore

INSTANCE_HEADER = "msrec-instance 1"
STORE_HEADER = "msrec-store 1"

SAMPLE_CHECK_FRACTION = 0.01
SAMPLE_CHECK_TOL = 1e-9


def synthetic_instance(n: int, seed: int, area: float = 1.0) -> Instance:
    """Random instance: coordinates uniform on [0, area]^2, probabilities
    uniform on [0, 1], Euclidean costs, horizon set safely above the
    validation bound.  Fully determined by (n, seed, area)."""
    if not 1 <= n <= 64:
        raise InvariantError(f"need 1..64 points, got {n}")
    if not area > 0:
        raise InvariantError(f"area must be positive, got {area}")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, area, size=(n, 2))
    probs = rng.uniform(0.0, 1.0, size=n)
    dx = coords[:, 0][:, None] - coords[:, 0][None, :]
    dy = coords[:, 1][:, None] - coords[:, 1][None, :]
    dist = np.sqrt(dx * dx + dy * dy)
    horizon = (n + 1) * float(dist.max()) * 1.25
    if horizon <= 0.0:  # single-point instance has an empty cost range
        horizon = float(area)
    return Instance(
        probs=tuple(probs),
        cost=tuple(tuple(row) for row in dist),
        horizon=horizon,
        metric="distance",
        coords=tuple((x, y) for x, y in coords),
    )


def save_instance(inst: Instance, path: str | Path):
    lines = [INSTANCE_HEADER, f"n {inst.n}", f"metric {inst.metric}",
             f"horizon {inst.horizon!r}"]
    if not inst.strict_horizon:
        lines.append("horizon-check off")
    for i in range(inst.n):
        parts = [f"point {i} {inst.probs[i]!r}"]
        if inst.coords is not None:
            x, y = inst.coords[i]
            parts.append(f"{x!r} {y!r}")
        lines.append(" ".join(parts))
    lines.append("costs explicit")
    for i, row in enumerate(inst.cost):
        lines.append(f"row {i} " + " ".join(repr(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _content_lines(path: str | Path):
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{what} is not a number: {token!r}", lineno) from None


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {token!r}", lineno) from None


def load_instance(path: str | Path) -> Instance:
    lines = list(_content_lines(path))
    if not lines or lines[0][1] != INSTANCE_HEADER:
        raise ParseError(f"missing header {INSTANCE_HEADER!r}", lines[0][0] if lines else 1)

    n = None
    metric = "distance"
    horizon = None
    strict = True
    probs: dict[int, float] = {}
    coords: dict[int, tuple[float, float]] = {}
    cost_mode = None
    rows: dict[int, tuple[float, ...]] = {}

    for lineno, line in lines[1:]:
        tokens = line.split()
        key = tokens[0]
        if key == "n":
            n = _parse_int(tokens[1], lineno, "point count")
        elif key == "metric":
            metric = tokens[1]
        elif key == "horizon":
            horizon = _parse_float(tokens[1], lineno, "horizon")
        elif key == "horizon-check":
            strict = tokens[1] != "off"
        elif key == "point":
            if n is None:
                raise ParseError("point record before the n directive", lineno)
            if len(tokens) not in (3, 5):
                raise ParseError("point record needs: id prob [x y]", lineno)
            pid = _parse_int(tokens[1], lineno, "point id")
            if not 0 <= pid < n or pid in probs:
                raise ParseError(f"point id {pid} duplicate or outside 0..{n - 1}", lineno)
            probs[pid] = _parse_float(tokens[2], lineno, f"probability of point {pid}")
            if len(tokens) == 5:
                coords[pid] = (
                    _parse_float(tokens[3], lineno, "x coordinate"),
                    _parse_float(tokens[4], lineno, "y coordinate"),
                )
        elif key == "costs":
            if tokens[1] not in ("explicit", "euclidean"):
                raise ParseError(f"unknown costs directive {tokens[1]!r}", lineno)
            cost_mode = tokens[1]
        elif key == "row":
            if n is None or cost_mode != "explicit":
                raise ParseError("row record outside an explicit costs block", lineno)
            rid = _parse_int(tokens[1], lineno, "row id")
            if not 0 <= rid < n or rid in rows:
                raise ParseError(f"row {rid} duplicate or outside 0..{n - 1}", lineno)
            values = tokens[2:]
            if len(values) != n:
                raise ParseError(f"row {rid} has {len(values)} entries, expected {n}", lineno)
            rows[rid] = tuple(
                _parse_float(v, lineno, f"cost[{rid}][{j}]") for j, v in enumerate(values)
            )
        else:
            raise ParseError(f"unknown directive {key!r}", lineno)

    if n is None:
        raise ParseError("missing n directive")
    if horizon is None:
        raise ParseError("missing horizon directive")
    if len(probs) != n:
        raise ParseError(f"{len(probs)} point records for n = {n}")
    if cost_mode is None:
        raise ParseError("missing costs directive")

    prob_tuple = tuple(probs[i] for i in range(n))
    coord_tuple = tuple(coords[i] for i in range(n)) if len(coords) == n else None
    if coords and coord_tuple is None:
        raise ParseError(f"coordinates given for {len(coords)} of {n} points")

    if cost_mode == "euclidean":
        if coord_tuple is None:
            raise ParseError("euclidean costs need coordinates on every point")
        cost = tuple(
            tuple(
                ((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5
                for bx, by in coord_tuple
            )
            for ax, ay in coord_tuple
        )
    else:
        if len(rows) != n:
            missing = sorted(set(range(n)) - set(rows))
            raise ParseError(f"cost matrix has {len(rows)} rows, missing rows {missing}")
        cost = tuple(rows[i] for i in range(n))

    return Instance(
        probs=prob_tuple,
        cost=cost,
        horizon=horizon,
        metric=metric,
        coords=coord_tuple,
        strict_horizon=strict,
    )


def save_store(store: CandidateStore, path: str | Path):
    dest = "-" if store.destination is None else str(store.destination)
    levels = sorted(store.levels)
    lines = [
        STORE_HEADER,
        f"fingerprint {store.fingerprint}",
        f"kind {store.kind}",
        f"destination {dest}",
        "levels " + " ".join(str(v) for v in levels),
    ]
    for length in levels:
        for cand in store.levels[length]:
            pts = ",".join(str(p) for p in cand.seq.points)
            lines.append(f"{length} {pts} {cand.travel_cost!r} {cand.pickup_prob!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_store(path: str | Path, inst: Instance) -> CandidateStore:
    """Read a store and accept it only if it belongs to ``inst``: the
    fingerprint must match and a deterministic 1% sample of the cached
    values must agree with direct recomputation."""
    lines = list(_content_lines(path))
    if not lines or lines[0][1] != STORE_HEADER:
        raise ParseError(f"missing header {STORE_HEADER!r}", lines[0][0] if lines else 1)

    header: dict[str, str] = {}
    body_start = None
    for pos, (lineno, line) in enumerate(lines[1:], start=1):
        key, _, value = line.partition(" ")
        if key in ("fingerprint", "kind", "destination", "levels") and key not in header:
            header[key] = value
            continue
        body_start = pos
        break
    for key in ("fingerprint", "kind", "destination", "levels"):
        if key not in header:
            raise ParseError(f"missing store header field {key!r}")
    if header["fingerprint"] != inst.fingerprint:
        raise StoreMismatchError(
            "store fingerprint does not match the instance "
            f"({header['fingerprint'][:12]}... vs {inst.fingerprint[:12]}...)"
        )
    if header["kind"] not in (IP_ONLY, IP_PLUS_BATCH):
        raise ParseError(f"unknown store kind {header['kind']!r}")
    destination = None if header["destination"] == "-" else int(header["destination"])
    declared = {int(tok) for tok in header["levels"].split()}

    levels: dict[int, list[Candidate]] = {}
    if body_start is not None:
        for lineno, line in lines[body_start:]:
            tokens = line.split()
            if len(tokens) != 4:
                raise ParseError("candidate record needs: length points travel prob", lineno)
            length = _parse_int(tokens[0], lineno, "candidate length")
            points = tuple(
                _parse_int(p, lineno, "point id") for p in tokens[1].split(",")
            )
            if len(points) != length:
                raise ParseError(
                    f"candidate {points} has {len(points)} points, declared {length}", lineno
                )
            if length not in declared:
                raise ParseError(f"candidate of undeclared length {length}", lineno)
            travel = _parse_float(tokens[2], lineno, "travel cost")
            prob = _parse_float(tokens[3], lineno, "pick-up probability")
            levels.setdefault(length, []).append(Candidate(Sequence(points), travel, prob))

    if set(levels) != declared:
        raise ParseError(f"declared levels {sorted(declared)} but found {sorted(levels)}")

    store = CandidateStore(
        levels={length: tuple(cands) for length, cands in levels.items()},
        fingerprint=inst.fingerprint,
        kind=header["kind"],
        destination=destination,
    )
    _sample_check(store, inst)
    return store


def _sample_check(store: CandidateStore, inst: Instance):
    everything = [c for length in sorted(store.levels) for c in store.levels[length]]
    if not everything:
        return
    rng = random.Random(int(inst.fingerprint[:16], 16))
    k = max(1, round(SAMPLE_CHECK_FRACTION * len(everything)))
    for cand in rng.sample(everything, min(k, len(everything))):
        travel = travel_cost_direct(cand.seq, inst)
        prob = pickup_probability(inst.probs[p] for p in cand.seq.points)
        if not _rel_close(travel, cand.travel_cost) or not _rel_close(prob, cand.pickup_prob):
            raise StoreMismatchError(
                f"stored values for {cand.seq.points} disagree with recomputation: "
                f"({cand.travel_cost}, {cand.pickup_prob}) vs ({travel}, {prob})"
            )


def _rel_close(a: float, b: float, tol: float = SAMPLE_CHECK_TOL) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b), 1.0)
