"""Sample paths, Hölder functions and their file formats."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, ParseError

HOLDER_CHECK_POINTS = 10_000


@dataclass
class SamplePath:
    """Observations ``values[u]`` at ``t = u / grid_n``, u = 0..grid_n."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise InvalidArgumentError("a path needs at least two samples")
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("path contains non-finite values")

    @property
    def grid_n(self) -> int:
        return self.values.size - 1

    @property
    def t(self):
        return np.arange(self.values.size) / self.grid_n

    def __len__(self):
        return self.values.size

    def with_values(self, values, **meta):
        return SamplePath(values, {**self.meta, **meta})

    # -- serialization -------------------------------------------------
    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        buf.write("t,value\n")
        for t, v in zip(self.t, self.values):
            buf.write(f"{float(t)!r},{float(v)!r}\n")
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    def to_json(self, target=None) -> str:
        doc = {"grid_n": self.grid_n, "values": [float(v) for v in self.values],
               "meta": self.meta}
        text = json.dumps(doc, indent=2, sort_keys=True)
        if target is not None:
            Path(target).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source) -> "SamplePath":
        doc = json.loads(_read(source))
        path = cls(doc["values"], doc.get("meta", {}))
        if "grid_n" in doc and doc["grid_n"] != path.grid_n:
            raise ParseError("grid_n does not match the number of values")
        return path

    @classmethod
    def from_csv(cls, source, meta=None) -> "SamplePath":
        rows = list(csv.reader(io.StringIO(_read(source))))
        if not rows or [c.strip() for c in rows[0]] != ["t", "value"]:
            raise ParseError("expected header 't,value'", line=1)
        ts, vs = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError("expected two columns", line=lineno)
            try:
                ts.append(float(row[0]))
                vs.append(float(row[1]))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
        if len(vs) < 2:
            raise ParseError("need at least two rows")
        ts = np.asarray(ts)
        n = len(vs) - 1
        if not np.allclose(ts, np.arange(n + 1) / n, rtol=0, atol=1e-9):
            raise ParseError("t column is not the uniform grid u/N on [0, 1]")
        try:
            return cls(vs, dict(meta or {}))
        except InvalidArgumentError as exc:
            raise ParseError(str(exc)) from None


def _read(source) -> str:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        return Path(source).read_text()
    if hasattr(source, "read"):
        return source.read()
    return str(source)


@dataclass(frozen=True)
class HolderFunction:
    """A deterministic Hölder exponent ``H(t)`` on [0, 1].

    ``kind`` is ``"constant"``, ``"sinusoid"`` or ``"tabulated"``; use the
    class constructors rather than building instances by hand.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in ("constant", "sinusoid", "tabulated"):
            raise InvalidArgumentError(f"unknown Hölder function kind {self.kind!r}")
        if self.kind == "constant":
            (h,) = self.params
            if not 0.0 < h < 1.0:
                raise InvalidArgumentError(f"H must lie in (0, 1), got {h}")
        else:
            grid = self(np.linspace(0.0, 1.0, HOLDER_CHECK_POINTS))
            if not (np.all(np.isfinite(grid)) and grid.min() > 0.0 and grid.max() < 1.0):
                raise InvalidArgumentError(
                    f"H(t) leaves (0, 1): range [{grid.min():.4g}, {grid.max():.4g}]")

    @classmethod
    def constant(cls, h):
        return cls("constant", (float(h),))

    @classmethod
    def sinusoid(cls, h0=0.5, amplitude=0.3, frequency=1.0):
        return cls("sinusoid", (float(h0), float(amplitude), float(frequency)))

    @classmethod
    def tabulated(cls, t, h):
        t = tuple(float(x) for x in t)
        h = tuple(float(x) for x in h)
        if len(t) != len(h) or len(t) < 2:
            raise InvalidArgumentError("tabulated H needs matching t/H lists of length >= 2")
        if any(b <= a for a, b in zip(t, t[1:])) or t[0] > 0.0 or t[-1] < 1.0:
            raise InvalidArgumentError("tabulated t must increase and cover [0, 1]")
        return cls("tabulated", (t, h))

    @classmethod
    def parse(cls, text: str) -> "HolderFunction":
        """Parse ``const:H``, ``sin:h0:amp:freq`` or ``table:t0=h0,t1=h1,...``."""
        kind, _, rest = text.partition(":")
        try:
            if kind in ("const", "constant"):
                return cls.constant(float(rest))
            if kind in ("sin", "sinusoid"):
                return cls.sinusoid(*(float(x) for x in rest.split(":")))
            if kind in ("table", "tabulated"):
                pairs = [item.split("=") for item in rest.split(",")]
                return cls.tabulated([p[0] for p in pairs], [p[1] for p in pairs])
        except (TypeError, ValueError, IndexError) as exc:
            raise InvalidArgumentError(f"bad Hölder function string {text!r}: {exc}") from None
        raise InvalidArgumentError(f"bad Hölder function string {text!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.params[0])
        if self.kind == "sinusoid":
            h0, amp, freq = self.params
            return h0 + amp * np.sin(2.0 * np.pi * freq * t)
        ts, hs = self.params
        return np.interp(t, ts, hs)

    def bounds(self):
        """(min, max) of H over [0, 1], from a dense grid for non-constant kinds."""
        if self.kind == "constant":
            return self.params[0], self.params[0]
        grid = self(np.linspace(0.0, 1.0, HOLDER_CHECK_POINTS))
        return float(grid.min()), float(grid.max())

    def to_dict(self):
        return {"kind": self.kind, "params": _listify(self.params)}

    @classmethod
    def from_dict(cls, doc):
        kind, params = doc["kind"], doc["params"]
        if kind == "constant":
            return cls.constant(*params)
        if kind == "sinusoid":
            return cls.sinusoid(*params)
        return cls.tabulated(*params)


def _listify(x):
    if isinstance(x, (tuple, list)):
        return [_listify(v) for v in x]
    return x
