"""On-disk container for factors and models, plus the community report.

One ASCII format covers all three stages. A small header carries the stage
tag and the dimensions, followed by named matrices (row per line) and
vectors (one line). Floats are written with repr, so round-trips are exact.

    commfit-factors v1
    stage lpca | nonneg | community
    n <rows>
    k <model width>
    scalar <name> <value>        (lpca only)
    matrix <name> <rows> <cols>
    <rows lines of cols floats>
    vector <name> <len>
    <one line>
    end
"""

import numpy as np

from .constrained import CommunityModel
from .lpca import LpcaFactors
from .nninit import NonnegFactors

__all__ = ["save_factors", "load_factors", "community_report"]

_MAGIC = "commfit-factors v1"


def _write_matrix(out, name, m):
    rows, cols = m.shape
    out.write(f"matrix {name} {rows} {cols}\n")
    if rows and cols:
        for r in range(rows):
            out.write(" ".join(repr(float(v)) for v in m[r]) + "\n")


def _write_vector(out, name, v):
    out.write(f"vector {name} {v.size}\n")
    if v.size:
        out.write(" ".join(repr(float(x)) for x in v) + "\n")


def save_factors(obj, target):
    """Write LpcaFactors, NonnegFactors, or a CommunityModel to a text stream."""
    target.write(_MAGIC + "\n")
    if isinstance(obj, LpcaFactors):
        target.write("stage lpca\n")
        target.write(f"n {obj.x.shape[0]}\n")
        target.write(f"k {obj.k}\n")
        target.write(f"scalar reg_weight_used {obj.reg_weight_used!r}\n")
        _write_matrix(target, "x", obj.x)
        _write_matrix(target, "y", obj.y)
    elif isinstance(obj, NonnegFactors):
        target.write("stage nonneg\n")
        target.write(f"n {obj.n}\n")
        target.write(f"k {obj.k_b + obj.k_c}\n")
        _write_matrix(target, "b", obj.b)
        _write_matrix(target, "c", obj.c)
    elif isinstance(obj, CommunityModel):
        target.write("stage community\n")
        target.write(f"n {obj.n}\n")
        target.write(f"k {obj.k}\n")
        _write_matrix(target, "v", obj.v)
        _write_vector(target, "w", obj.w)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    target.write("end\n")


class _Reader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self):
        if self.pos >= len(self.lines):
            raise ValueError("truncated factors file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect(self, keyword):
        parts = self.next().split()
        if not parts or parts[0] != keyword:
            raise ValueError(f"expected {keyword!r} in factors file")
        return parts[1:]


def _read_matrix(reader, expected_name):
    name, rows, cols = reader.expect("matrix")
    if name != expected_name:
        raise ValueError(f"expected matrix {expected_name!r}, found {name!r}")
    rows, cols = int(rows), int(cols)
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols))
    data = [[float(tok) for tok in reader.next().split()] for _ in range(rows)]
    m = np.array(data)
    if m.shape != (rows, cols):
        raise ValueError(f"matrix {expected_name!r} has wrong shape")
    return m


def _read_vector(reader, expected_name):
    name, size = reader.expect("vector")
    if name != expected_name:
        raise ValueError(f"expected vector {expected_name!r}, found {name!r}")
    size = int(size)
    if size == 0:
        return np.zeros(0)
    v = np.array([float(tok) for tok in reader.next().split()])
    if v.size != size:
        raise ValueError(f"vector {expected_name!r} has wrong length")
    return v


def load_factors(source):
    """Read a factors file; the stage tag decides the returned type."""
    text = source if isinstance(source, str) else source.read()
    reader = _Reader(text.splitlines())
    if reader.next() != _MAGIC:
        raise ValueError("not a commfit factors file")
    (stage,) = reader.expect("stage")
    (n,) = reader.expect("n")
    (k,) = reader.expect("k")
    n, k = int(n), int(k)
    if stage == "lpca":
        name, value = reader.expect("scalar")
        if name != "reg_weight_used":
            raise ValueError("missing reg_weight_used")
        x = _read_matrix(reader, "x")
        y = _read_matrix(reader, "y")
        obj = LpcaFactors(x=x, y=y, k=k, reg_weight_used=float(value))
    elif stage == "nonneg":
        b = _read_matrix(reader, "b")
        c = _read_matrix(reader, "c")
        obj = NonnegFactors(b=b, c=c)
    elif stage == "community":
        v = _read_matrix(reader, "v")
        w = _read_vector(reader, "w")
        obj = CommunityModel(v=v, w=w)
    else:
        raise ValueError(f"unknown stage {stage!r}")
    if reader.expect("end") != []:
        raise ValueError("trailing content after 'end'")
    return obj


def community_report(model, top=10):
    """Human-readable per-community summary of a fitted model.

    Each line gives the community's sign (homophilous/heterophilous), its
    weight, the odds multiplier exp(w) for full coparticipation, and the
    strongest member nodes with their membership values.
    """
    n_homo = int(np.sum(model.w > 0))
    n_het = int(np.sum(model.w < 0))
    lines = [
        f"community model: n={model.n} k={model.k} "
        f"({n_homo} homophilous, {n_het} heterophilous)"
    ]
    for c in range(model.k):
        w = model.w[c]
        kind = "homophilous " if w > 0 else "heterophilous"
        with np.errstate(over="ignore"):
            odds = float(np.exp(w))
        col = model.v[:, c]
        strongest = np.argsort(-col, kind="stable")[:top]
        strongest = [i for i in strongest if col[i] > 0.0]
        members = " ".join(f"{i}({col[i]:.2f})" for i in strongest)
        lines.append(
            f"community {c:3d}: {kind} w={w:+.4f} odds x{odds:.4g} "
            f"members>=0.5: {int(np.sum(col >= 0.5))} top: {members}"
        )
    return "\n".join(lines) + "\n"
