"""Gaussian-rational scalars, exact matrices, alternating tensors.

Every module downstream runs on these three types.  Scalars are elements
of Q(i) stored as a pair of reduced fractions, so equality of any two
computed quantities is decidable and all tests are equality tests.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction
from itertools import combinations


class SingularMatrix(ValueError):
    """Raised when an exact inverse is requested of a singular matrix."""


class DimensionMismatch(ValueError):
    """Raised when shapes of matrices/tensors do not line up."""


_RAT = r"-?\d+(?:/\d+)?"
_SCALAR_RE = _re.compile(
    rf"^\s*({_RAT})\s*(?:([+-])\s*({_RAT})\s*\*?\s*i\s*)?$"
)
_PURE_IM_RE = _re.compile(rf"^\s*(-?)\s*({_RAT})?\s*\*?\s*i\s*$")


class ExactScalar:
    """An element re + i*im of Q(i), immutable and canonical.

    Fraction keeps numerator/denominator reduced with positive
    denominator, so two equal values always compare equal and hash
    equal.  Division by zero raises ZeroDivisionError.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    # -- constructors ------------------------------------------------

    @staticmethod
    def coerce(x) -> "ExactScalar":
        if isinstance(x, ExactScalar):
            return x
        if isinstance(x, (int, Fraction)):
            return ExactScalar(x)
        if isinstance(x, str):
            return ExactScalar.from_string(x)
        raise TypeError(f"cannot coerce {x!r} to ExactScalar")

    @staticmethod
    def from_string(s: str) -> "ExactScalar":
        """Parse "p/q", "p/q+r/s i", "p/q-r/s i", or a pure "r/s i"."""
        m = _PURE_IM_RE.match(s)
        if m:
            mag = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            return ExactScalar(0, -mag if m.group(1) == "-" else mag)
        m = _SCALAR_RE.match(s)
        if not m:
            raise ValueError(f"not a Gaussian rational literal: {s!r}")
        re_part = Fraction(m.group(1))
        if m.group(3) is None:
            return ExactScalar(re_part)
        im_part = Fraction(m.group(3))
        if m.group(2) == "-":
            im_part = -im_part
        return ExactScalar(re_part, im_part)

    # -- arithmetic --------------------------------------------------

    def __add__(self, other):
        other = ExactScalar.coerce(other)
        return ExactScalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = ExactScalar.coerce(other)
        return ExactScalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return ExactScalar.coerce(other) - self

    def __mul__(self, other):
        other = ExactScalar.coerce(other)
        return ExactScalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ExactScalar.coerce(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division of ExactScalar by zero")
        return ExactScalar(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        return ExactScalar.coerce(other) / self

    def __neg__(self):
        return ExactScalar(-self.re, -self.im)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            return (ExactScalar(1) / self) ** (-n)
        out = ExactScalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "ExactScalar":
        return ExactScalar(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_rational(self) -> bool:
        return self.im == 0

    def as_fraction(self) -> Fraction:
        if self.im != 0:
            raise ValueError(f"{self} has a nonzero imaginary part")
        return self.re

    # -- identity ----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExactScalar(other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def sort_key(self):
        return (self.re, self.im)

    # -- display -----------------------------------------------------

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)} i"

    __repr__ = __str__

    def to_json(self) -> str:
        return str(self)

    @staticmethod
    def from_json(s: str) -> "ExactScalar":
        return ExactScalar.from_string(s)


ZERO = ExactScalar(0)
ONE = ExactScalar(1)
I = ExactScalar(0, 1)
HALF = ExactScalar(Fraction(1, 2))


def scalar(x) -> ExactScalar:
    """Shorthand coercion used throughout the package."""
    return ExactScalar.coerce(x)


class RationalMatrix:
    """A rows x cols matrix over ExactScalar, immutable after construction."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        rows = tuple(tuple(ExactScalar.coerce(x) for x in row) for row in entries)
        if not rows or not rows[0]:
            raise DimensionMismatch("matrix must have at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionMismatch("ragged rows")
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", width)
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, name, value):
        raise AttributeError("RationalMatrix is immutable")

    @staticmethod
    def identity(n: int) -> "RationalMatrix":
        return RationalMatrix(
            [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def zeros(r: int, c: int) -> "RationalMatrix":
        return RationalMatrix([[ZERO] * c for _ in range(r)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("matrix addition shape mismatch")
        return RationalMatrix(
            [
                [self.entries[i][j] + other.entries[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self.scale(ExactScalar(-1))

    def scale(self, c) -> "RationalMatrix":
        c = ExactScalar.coerce(c)
        return RationalMatrix(
            [[c * x for x in row] for row in self.entries]
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, ExactScalar)):
            return self.scale(other)
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        return RationalMatrix(
            [
                [
                    sum(
                        (self.entries[i][k] * other.entries[k][j] for k in range(self.cols)),
                        ZERO,
                    )
                    for j in range(other.cols)
                ]
                for i in range(self.rows)
            ]
        )

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, ExactScalar)):
            return self.scale(other)
        return NotImplemented

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def apply(self, vec):
        """Matrix times column vector, vec a sequence of coercibles."""
        v = [ExactScalar.coerce(x) for x in vec]
        if len(v) != self.cols:
            raise DimensionMismatch("vector length does not match column count")
        return tuple(
            sum((self.entries[i][k] * v[k] for k in range(self.cols)), ZERO)
            for i in range(self.rows)
        )

    def det(self) -> ExactScalar:
        if self.rows != self.cols:
            raise DimensionMismatch("determinant of a non-square matrix")
        n = self.rows
        a = [list(row) for row in self.entries]
        out = ONE
        for col in range(n):
            pivot = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
            if pivot is None:
                return ZERO
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
                out = -out
            out = out * a[col][col]
            inv = ONE / a[col][col]
            for r in range(col + 1, n):
                if a[r][col].is_zero():
                    continue
                f = a[r][col] * inv
                for c in range(col, n):
                    a[r][c] = a[r][c] - f * a[col][c]
        return out

    def inverse(self) -> "RationalMatrix":
        """Exact Gauss-Jordan inverse; raises SingularMatrix if det = 0."""
        if self.rows != self.cols:
            raise DimensionMismatch("inverse of a non-square matrix")
        n = self.rows
        a = [list(row) + [ONE if i == j else ZERO for j in range(n)]
             for i, row in enumerate(self.entries)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
            if pivot is None:
                raise SingularMatrix("matrix has zero determinant")
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
            inv = ONE / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r == col or a[r][col].is_zero():
                    continue
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return RationalMatrix([row[n:] for row in a])

    def submatrix(self, row_idx, col_idx) -> "RationalMatrix":
        return RationalMatrix(
            [[self.entries[i][j] for j in col_idx] for i in row_idx]
        )

    def __str__(self):
        body = "; ".join(
            ", ".join(str(x) for x in row) for row in self.entries
        )
        return f"[{body}]"

    __repr__ = __str__

    def to_json(self):
        return [[x.to_json() for x in row] for row in self.entries]

    @staticmethod
    def from_json(data) -> "RationalMatrix":
        return RationalMatrix(data)


def invert(m: RationalMatrix) -> RationalMatrix:
    """Exact inverse of a square matrix; SingularMatrix when det = 0."""
    return m.inverse()


def _as_value(val, valdim):
    # scalar-valued entries stay bare ExactScalars; vector-valued ones
    # are length-valdim tuples
    if valdim is None:
        return ExactScalar.coerce(val)
    if isinstance(val, (list, tuple)):
        col = tuple(ExactScalar.coerce(x) for x in val)
    else:
        raise DimensionMismatch("vector-valued tensor entry must be a sequence")
    if len(col) != valdim:
        raise DimensionMismatch(f"value column has length {len(col)}, expected {valdim}")
    return col


def _value_is_zero(val):
    if isinstance(val, tuple):
        return all(x.is_zero() for x in val)
    return val.is_zero()


def _value_add(a, b):
    if isinstance(a, tuple):
        return tuple(x + y for x, y in zip(a, b))
    return a + b


def _value_scale(c, val):
    if isinstance(val, tuple):
        return tuple(c * x for x in val)
    return c * val


class AltTensor:
    """An alternating k-tensor on an n-dimensional space.

    Coefficients live only on strictly increasing index tuples; the
    evaluation map extends them antisymmetrically, and any repeated
    index evaluates to exactly zero.  With valdim set, each key maps
    to a length-valdim column (a tensor valued in another space).
    Indices are 1-based, matching the way bases are written on paper.
    """

    __slots__ = ("degree", "dim", "valdim", "coeffs")

    def __init__(self, degree: int, dim: int, coeffs=None, valdim=None):
        if degree not in (2, 3):
            raise DimensionMismatch("tensor degree must be 2 or 3")
        if dim < 1:
            raise DimensionMismatch("tensor dim must be positive")
        table = {}
        for key, val in (coeffs or {}).items():
            key = tuple(int(i) for i in key)
            if len(key) != degree:
                raise DimensionMismatch(f"key {key} has wrong length for degree {degree}")
            if any(not (1 <= i <= dim) for i in key):
                raise DimensionMismatch(f"key {key} out of range for dim {dim}")
            if any(a >= b for a, b in zip(key, key[1:])):
                raise DimensionMismatch(f"key {key} is not strictly increasing")
            v = _as_value(val, valdim)
            if not _value_is_zero(v):
                table[key] = v
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "valdim", valdim)
        object.__setattr__(self, "coeffs", table)

    def __setattr__(self, name, value):
        raise AttributeError("AltTensor is immutable")

    def evaluate(self, idx):
        """Value on an arbitrary index tuple, by antisymmetrization."""
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.degree:
            raise DimensionMismatch("wrong number of arguments")
        if len(set(idx)) != len(idx):
            return self._zero_value()
        order = sorted(range(len(idx)), key=lambda p: idx[p])
        key = tuple(idx[p] for p in order)
        sign = _perm_sign(order)
        val = self.coeffs.get(key)
        if val is None:
            return self._zero_value()
        return _value_scale(ExactScalar(sign), val)

    def _zero_value(self):
        if self.valdim is None:
            return ZERO
        return tuple(ZERO for _ in range(self.valdim))

    def __eq__(self, other):
        if not isinstance(other, AltTensor):
            return NotImplemented
        return (
            self.degree == other.degree
            and self.dim == other.dim
            and self.valdim == other.valdim
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.degree, self.dim, self.valdim,
                     tuple(sorted(self.coeffs.items()))))

    def __add__(self, other):
        if (self.degree, self.dim, self.valdim) != (other.degree, other.dim, other.valdim):
            raise DimensionMismatch("tensor addition shape mismatch")
        out = dict(self.coeffs)
        for key, val in other.coeffs.items():
            cur = out.get(key)
            out[key] = val if cur is None else _value_add(cur, val)
        return AltTensor(self.degree, self.dim, out, self.valdim)

    def __sub__(self, other):
        return self + other.scale(ExactScalar(-1))

    def __neg__(self):
        return self.scale(ExactScalar(-1))

    def scale(self, c) -> "AltTensor":
        c = ExactScalar.coerce(c)
        return AltTensor(
            self.degree,
            self.dim,
            {k: _value_scale(c, v) for k, v in self.coeffs.items()},
            self.valdim,
        )

    def is_zero(self) -> bool:
        return not self.coeffs

    def map_values(self, fn) -> "AltTensor":
        """Apply fn to each value column (used to post-compose with a map)."""
        return AltTensor(
            self.degree,
            self.dim,
            {k: fn(v) for k, v in self.coeffs.items()},
            self.valdim,
        )

    def __str__(self):
        if not self.coeffs:
            return "0"
        bits = []
        for key in sorted(self.coeffs):
            val = self.coeffs[key]
            label = "".join(f"e{i}*" for i in key)
            if isinstance(val, tuple):
                col = "(" + ", ".join(str(x) for x in val) + ")"
                bits.append(f"{col} {label}")
            else:
                bits.append(f"({val}) {label}")
        return " + ".join(bits)

    __repr__ = __str__

    def to_json(self):
        entries = []
        for key in sorted(self.coeffs):
            val = self.coeffs[key]
            if isinstance(val, tuple):
                jval = [x.to_json() for x in val]
            else:
                jval = val.to_json()
            entries.append({"idx": list(key), "val": jval})
        out = {"degree": self.degree, "dim": self.dim, "entries": entries}
        if self.valdim is not None:
            out["valdim"] = self.valdim
        return out

    @staticmethod
    def from_json(data) -> "AltTensor":
        coeffs = {tuple(e["idx"]): e["val"] for e in data["entries"]}
        return AltTensor(data["degree"], data["dim"], coeffs, data.get("valdim"))


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def alt_pullback(k: int, mu: RationalMatrix, t: AltTensor) -> AltTensor:
    """Pull an alternating k-tensor back along the inverse of mu.

    result(w_1, ..., w_k) = t(mu^{-1} w_1, ..., mu^{-1} w_k).  The
    coefficient on an increasing tuple I is the sum over increasing
    tuples J of t_J times the (J, I) minor of mu^{-1}.  Value columns
    of a vector-valued tensor ride along untouched.
    """
    if mu.rows != mu.cols:
        raise DimensionMismatch("pullback needs a square matrix")
    if t.degree != k:
        raise DimensionMismatch(f"tensor degree {t.degree} does not match k={k}")
    if t.dim != mu.rows:
        raise DimensionMismatch("tensor dim does not match matrix size")
    n = mu.rows
    inv = mu.inverse()
    out = {}
    for idx in combinations(range(1, n + 1), k):
        total = None
        cols = [i - 1 for i in idx]
        for key, val in t.coeffs.items():
            rows = [j - 1 for j in key]
            minor = inv.submatrix(rows, cols).det()
            if minor.is_zero():
                continue
            term = _value_scale(minor, val)
            total = term if total is None else _value_add(total, term)
        if total is not None and not _value_is_zero(total):
            out[idx] = total
    return AltTensor(k, n, out, t.valdim)
