"""TSPLIB instance and tour file handling.

Supports the four distance families the sparsifier experiments use
(EUC_2D, GEO, ATT and EXPLICIT matrices in the common row formats) with
bit-exact integer rounding per the TSPLIB reference definitions.
Vertices are 1-indexed in files and in the public accessors; every other
module works with 0-indexed arrays obtained from ``Instance.distance_matrix``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

SUPPORTED_KINDS = ("EUC_2D", "GEO", "ATT", "EXPLICIT")
SUPPORTED_FORMATS = (
    "FULL_MATRIX",
    "UPPER_ROW",
    "LOWER_ROW",
    "UPPER_DIAG_ROW",
    "LOWER_DIAG_ROW",
)

# Constants fixed by the TSPLIB definition of geographical distances.
GEO_PI = 3.141592
GEO_RADIUS = 6378.388


class TsplibParseError(ValueError):
    """Malformed TSPLIB input; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFormatError(TsplibParseError):
    """Edge weight type or format outside the supported families."""


def _nint(x):
    """TSPLIB nearest-integer rounding (half away from zero via floor(x+0.5))."""
    return np.floor(x + 0.5)


@dataclass(eq=False)
class Instance:
    """A symmetric TSP instance with integer distances.

    Exactly one of ``coords``/``matrix`` is populated, matching ``kind``.
    Instances are immutable after construction and safe to share.
    """

    name: str
    n: int
    kind: str
    coords: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in SUPPORTED_KINDS:
            raise UnsupportedFormatError(f"unsupported format: {self.kind!r}")
        if self.n < 4:
            raise ValueError(f"n < 4: got {self.n} vertices, need at least 4")
        coord_kinds = ("EUC_2D", "GEO", "ATT")
        if self.kind in coord_kinds:
            if self.coords is None or self.matrix is not None:
                raise ValueError(f"{self.kind} instance requires coords and no matrix")
            self.coords = np.asarray(self.coords, dtype=float)
            if self.coords.shape != (self.n, 2):
                raise ValueError(
                    f"expected {self.n} coordinate pairs, got shape {self.coords.shape}"
                )
            if not np.all(np.isfinite(self.coords)):
                raise ValueError("coordinates must be finite")
            self.coords.setflags(write=False)
        else:
            if self.matrix is None or self.coords is not None:
                raise ValueError("EXPLICIT instance requires matrix and no coords")
            self.matrix = np.asarray(self.matrix, dtype=np.int64)
            if self.matrix.shape != (self.n, self.n):
                raise ValueError(
                    f"expected {self.n}x{self.n} matrix, got shape {self.matrix.shape}"
                )
            if np.any(self.matrix < 0):
                raise ValueError("distances must be nonnegative")
            if not np.array_equal(self.matrix, self.matrix.T):
                raise ValueError("asymmetric matrix: only symmetric TSP is supported")
            self.matrix.setflags(write=False)

    @cached_property
    def _distance_matrix(self) -> np.ndarray:
        if self.kind == "EXPLICIT":
            d = self.matrix.copy()
        elif self.kind == "EUC_2D":
            d = _euc2d_matrix(self.coords)
        elif self.kind == "ATT":
            d = _att_matrix(self.coords)
        else:
            d = _geo_matrix(self.coords)
        np.fill_diagonal(d, 0)
        d.setflags(write=False)
        return d

    def distance_matrix(self) -> np.ndarray:
        """Full n-by-n int64 distance matrix, 0-indexed, read-only."""
        return self._distance_matrix

    def distance(self, u: int, v: int) -> int:
        """Distance between 1-indexed vertices u and v."""
        if u == v:
            raise ValueError("self-loop distance undefined")
        for w in (u, v):
            if not 1 <= w <= self.n:
                raise ValueError(f"vertex {w} out of range 1..{self.n}")
        return int(self._distance_matrix[u - 1, v - 1])


def _euc2d_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return _nint(np.sqrt((diff * diff).sum(axis=2))).astype(np.int64)


def _att_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    r = np.sqrt((diff * diff).sum(axis=2) / 10.0)
    t = _nint(r)
    return (t + (t < r)).astype(np.int64)


def _geo_matrix(coords: np.ndarray) -> np.ndarray:
    # degree.minute encoding: integer part is degrees, fraction is minutes
    deg = np.trunc(coords)
    minutes = coords - deg
    rad = GEO_PI * (deg + 5.0 * minutes / 3.0) / 180.0
    lat, lon = rad[:, 0], rad[:, 1]
    q1 = np.cos(lon[:, None] - lon[None, :])
    q2 = np.cos(lat[:, None] - lat[None, :])
    q3 = np.cos(lat[:, None] + lat[None, :])
    arg = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
    d = np.trunc(GEO_RADIUS * np.arccos(arg) + 1.0).astype(np.int64)
    np.fill_diagonal(d, 0)
    return d


@dataclass(frozen=True)
class Tour:
    """A Hamiltonian cycle given as a permutation of 1..n."""

    order: tuple[int, ...]

    def __post_init__(self):
        n = len(self.order)
        if sorted(self.order) != list(range(1, n + 1)):
            raise ValueError("not a permutation of 1..n")

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        """The n unordered vertex pairs of the cycle, 1-indexed."""
        out = []
        for a, b in zip(self.order, self.order[1:] + self.order[:1]):
            out.append((a, b) if a < b else (b, a))
        return frozenset(out)

    def edges_zero_based(self) -> frozenset[tuple[int, int]]:
        return frozenset((a - 1, b - 1) for a, b in self.edges)

    def length(self, inst: Instance) -> int:
        d = inst.distance_matrix()
        return int(sum(d[a - 1, b - 1] for a, b in self.edges))


class _Scanner:
    """Line scanner that keeps track of line numbers for error reporting."""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next_line(self) -> str | None:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        return None

    @property
    def lineno(self) -> int:
        return self.pos

    def read_numbers(self, count: int, what: str) -> list[float]:
        vals: list[float] = []
        while len(vals) < count:
            line = self.next_line()
            if line is None or line.upper() == "EOF":
                raise TsplibParseError(
                    f"truncated {what}: expected {count} values, got {len(vals)}",
                    line=self.lineno,
                )
            for tok in line.split():
                try:
                    vals.append(float(tok))
                except ValueError:
                    raise TsplibParseError(
                        f"bad numeric token {tok!r} in {what}", line=self.lineno
                    ) from None
        if len(vals) > count:
            raise TsplibParseError(
                f"{what} has more values than expected ({len(vals)} > {count})",
                line=self.lineno,
            )
        return vals


def _split_keyword(line: str) -> tuple[str, str]:
    if ":" in line:
        key, value = line.split(":", 1)
        return key.strip().upper(), value.strip()
    parts = line.split(None, 1)
    return parts[0].upper(), parts[1].strip() if len(parts) > 1 else ""


def parse_instance(text: str) -> Instance:
    """Parse a TSPLIB .tsp document into an Instance."""
    sc = _Scanner(text)
    name = ""
    n: int | None = None
    ew_type: str | None = None
    ew_format: str | None = None
    coords: np.ndarray | None = None
    matrix: np.ndarray | None = None

    while True:
        line = sc.next_line()
        if line is None or line.upper() == "EOF":
            break
        key, value = _split_keyword(line)
        if key == "NAME":
            name = value
        elif key == "TYPE":
            if value.split()[0].upper() not in ("TSP",):
                raise UnsupportedFormatError(
                    f"unsupported format: TYPE {value!r} (only symmetric TSP)",
                    line=sc.lineno,
                )
        elif key == "DIMENSION":
            n = int(value)
            if n < 4:
                raise TsplibParseError(f"n < 4: DIMENSION is {n}", line=sc.lineno)
        elif key == "EDGE_WEIGHT_TYPE":
            ew_type = value.upper()
            if ew_type not in SUPPORTED_KINDS:
                raise UnsupportedFormatError(
                    f"unsupported format: EDGE_WEIGHT_TYPE {ew_type}", line=sc.lineno
                )
        elif key == "EDGE_WEIGHT_FORMAT":
            ew_format = value.upper()
        elif key == "NODE_COORD_SECTION":
            if n is None:
                raise TsplibParseError(
                    "NODE_COORD_SECTION before DIMENSION", line=sc.lineno
                )
            coords = _read_coord_section(sc, n)
        elif key == "EDGE_WEIGHT_SECTION":
            if n is None:
                raise TsplibParseError(
                    "EDGE_WEIGHT_SECTION before DIMENSION", line=sc.lineno
                )
            if ew_format not in SUPPORTED_FORMATS:
                raise UnsupportedFormatError(
                    f"unsupported format: EDGE_WEIGHT_FORMAT {ew_format}",
                    line=sc.lineno,
                )
            matrix = _read_weight_section(sc, n, ew_format)
        elif key == "DISPLAY_DATA_SECTION":
            if n is None:
                raise TsplibParseError(
                    "DISPLAY_DATA_SECTION before DIMENSION", line=sc.lineno
                )
            for _ in range(n):
                sc.next_line()
        # remaining keywords (COMMENT, DISPLAY_DATA_TYPE, ...) carry no data

    if n is None:
        raise TsplibParseError("missing DIMENSION")
    if ew_type is None:
        raise TsplibParseError("missing EDGE_WEIGHT_TYPE")
    if ew_type == "EXPLICIT":
        if matrix is None:
            raise TsplibParseError("EXPLICIT instance without EDGE_WEIGHT_SECTION")
        return Instance(name=name, n=n, kind="EXPLICIT", matrix=matrix)
    if coords is None:
        raise TsplibParseError(f"{ew_type} instance without NODE_COORD_SECTION")
    return Instance(name=name, n=n, kind=ew_type, coords=coords)


def _read_coord_section(sc: _Scanner, n: int) -> np.ndarray:
    coords = np.empty((n, 2), dtype=float)
    seen = np.zeros(n, dtype=bool)
    for _ in range(n):
        line = sc.next_line()
        if line is None or line.upper() == "EOF":
            raise TsplibParseError(
                f"truncated NODE_COORD_SECTION: expected {n} rows", line=sc.lineno
            )
        parts = line.split()
        if len(parts) < 3:
            raise TsplibParseError("coordinate row needs `index x y`", line=sc.lineno)
        try:
            idx = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise TsplibParseError(
                f"bad coordinate row {line!r}", line=sc.lineno
            ) from None
        if not 1 <= idx <= n:
            raise TsplibParseError(f"vertex index {idx} out of 1..{n}", line=sc.lineno)
        if seen[idx - 1]:
            raise TsplibParseError(f"duplicate vertex index {idx}", line=sc.lineno)
        seen[idx - 1] = True
        coords[idx - 1] = (x, y)
    return coords


def _read_weight_section(sc: _Scanner, n: int, fmt: str) -> np.ndarray:
    counts = {
        "FULL_MATRIX": n * n,
        "UPPER_ROW": n * (n - 1) // 2,
        "LOWER_ROW": n * (n - 1) // 2,
        "UPPER_DIAG_ROW": n * (n + 1) // 2,
        "LOWER_DIAG_ROW": n * (n + 1) // 2,
    }
    vals = sc.read_numbers(counts[fmt], f"EDGE_WEIGHT_SECTION ({fmt})")
    arr = np.asarray(vals)
    if not np.all(arr == np.round(arr)):
        raise TsplibParseError("explicit weights must be integers", line=sc.lineno)
    ints = arr.astype(np.int64)

    m = np.zeros((n, n), dtype=np.int64)
    if fmt == "FULL_MATRIX":
        m = ints.reshape(n, n)
        if np.any(np.diagonal(m) != 0):
            raise TsplibParseError("FULL_MATRIX has nonzero diagonal", line=sc.lineno)
        if not np.array_equal(m, m.T):
            raise TsplibParseError(
                "asymmetric FULL_MATRIX: only symmetric TSP is supported",
                line=sc.lineno,
            )
        return m
    pos = 0
    for i in range(n):
        if fmt == "UPPER_ROW":
            js = range(i + 1, n)
        elif fmt == "LOWER_ROW":
            js = range(0, i)
        elif fmt == "UPPER_DIAG_ROW":
            js = range(i, n)
        else:  # LOWER_DIAG_ROW
            js = range(0, i + 1)
        for j in js:
            m[i, j] = ints[pos]
            m[j, i] = ints[pos]
            pos += 1
    np.fill_diagonal(m, 0)
    return m


def parse_tour(text: str, n: int) -> Tour:
    """Parse a TSPLIB .tour/.opt.tour document with n vertices."""
    sc = _Scanner(text)
    order: list[int] = []
    in_section = False
    terminated = False
    while True:
        line = sc.next_line()
        if line is None:
            break
        up = line.upper()
        if up.startswith("TOUR_SECTION"):
            in_section = True
            continue
        if not in_section:
            continue
        stop = False
        for tok in line.split():
            if tok == "-1":
                terminated = True
                stop = True
                break
            if tok.upper() == "EOF":
                stop = True
                break
            try:
                order.append(int(tok))
            except ValueError:
                raise TsplibParseError(
                    f"bad tour token {tok!r}", line=sc.lineno
                ) from None
        if stop:
            break
    if not in_section:
        raise TsplibParseError("missing TOUR_SECTION")
    if not terminated:
        raise TsplibParseError("TOUR_SECTION not terminated by -1")
    if len(order) != n:
        raise TsplibParseError(
            f"dimension mismatch: tour lists {len(order)} vertices, expected {n}"
        )
    if sorted(order) != list(range(1, n + 1)):
        raise TsplibParseError("not a permutation of 1..n")
    return Tour(order=tuple(order))


def load_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


def load_tour(path, n: int) -> Tour:
    return parse_tour(Path(path).read_text(), n)


def format_tour(tour: Tour, name: str = "tour") -> str:
    """Render a tour in TSPLIB .opt.tour format."""
    lines = [
        f"NAME : {name}",
        "TYPE : TOUR",
        f"DIMENSION : {tour.n}",
        "TOUR_SECTION",
    ]
    lines.extend(str(v) for v in tour.order)
    lines.append("-1")
    lines.append("EOF")
    return "\n".join(lines) + "\n"
