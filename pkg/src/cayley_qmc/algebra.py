"""Single-site 2x2 operators in the Pauli basis and product observables.

``PauliOp`` holds the coefficients of ``a0*1 + a1*X + a2*Y + a3*Z``.
``DiagOp`` holds a diagonal operator by its two eigenvalues: ``dp`` on spin +1
and ``dm`` on spin -1. All traces are normalized so the identity has trace 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ParamError, SupportError
from .tree import VertexCoord

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = (_I, _X, _Y, _Z)


def _real_if_exact(z: complex):
    return z.real if isinstance(z, complex) and z.imag == 0 else z


@dataclass(frozen=True)
class PauliOp:
    a0: complex = 0.0
    a1: complex = 0.0
    a2: complex = 0.0
    a3: complex = 0.0

    @property
    def coeffs(self) -> tuple:
        return (self.a0, self.a1, self.a2, self.a3)

    def matrix(self) -> np.ndarray:
        return sum(c * m for c, m in zip(self.coeffs, PAULI_MATRICES))

    @classmethod
    def from_matrix(cls, m) -> PauliOp:
        # Pauli matrices are orthogonal under (1/2) Tr(P^dagger M)
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ParamError(f"expected a 2x2 matrix, got shape {m.shape}")
        coeffs = [_real_if_exact(complex(np.trace(p.conj().T @ m) / 2)) for p in PAULI_MATRICES]
        return cls(*coeffs)

    @classmethod
    def from_label(cls, label: str) -> PauliOp:
        try:
            idx = "IXYZ".index(label.strip().upper())
        except ValueError:
            raise ParamError(f"unknown Pauli label {label!r}; expected one of I, X, Y, Z") from None
        coeffs = [0.0] * 4
        coeffs[idx] = 1.0
        return cls(*coeffs)

    @property
    def is_diagonal(self) -> bool:
        return self.a1 == 0 and self.a2 == 0

    @property
    def is_identity(self) -> bool:
        return self.a0 == 1 and self.a1 == 0 and self.a2 == 0 and self.a3 == 0

    def __add__(self, other: PauliOp) -> PauliOp:
        return PauliOp(*(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, c) -> PauliOp:
        return PauliOp(*(c * a for a in self.coeffs))


IDENTITY = PauliOp(1.0)
SIGMA_X = PauliOp(a1=1.0)
SIGMA_Y = PauliOp(a2=1.0)
SIGMA_Z = PauliOp(a3=1.0)


@dataclass(frozen=True)
class DiagOp:
    """Diagonal operator ``diag(dp, dm)``."""

    dp: float
    dm: float

    @classmethod
    def from_pauli(cls, a0, a3) -> DiagOp:
        return cls(a0 + a3, a0 - a3)

    @classmethod
    def scalar(cls, c) -> DiagOp:
        return cls(c, c)

    @property
    def a0(self):
        return (self.dp + self.dm) / 2

    @property
    def a3(self):
        return (self.dp - self.dm) / 2

    def to_pauli(self) -> PauliOp:
        return PauliOp(self.a0, 0.0, 0.0, self.a3)

    @property
    def is_positive(self) -> bool:
        return self.dp > 0 and self.dm > 0

    def value(self, spin: int):
        return self.dp if spin > 0 else self.dm

    def sqrt(self) -> DiagOp:
        if not (self.dp >= 0 and self.dm >= 0):
            raise ParamError(f"square root of a non-positive diagonal operator {self}")
        return DiagOp(math.sqrt(self.dp), math.sqrt(self.dm))

    def __mul__(self, other):
        if isinstance(other, DiagOp):
            return DiagOp(self.dp * other.dp, self.dm * other.dm)
        return DiagOp(self.dp * other, self.dm * other)

    __rmul__ = __mul__

    def matrix(self) -> np.ndarray:
        return np.diag([self.dp, self.dm])


def diagonal_part(a: PauliOp) -> DiagOp:
    """Conditional expectation onto the diagonal subalgebra: drop the X and Y parts."""
    return DiagOp(_real_if_exact(a.a0 + a.a3), _real_if_exact(a.a0 - a.a3))


def normalized_trace(a: DiagOp | PauliOp):
    if isinstance(a, PauliOp):
        return a.a0
    return (a.dp + a.dm) / 2


@dataclass
class ProductObservable:
    """Tensor product of single-site operators; unlisted sites carry the identity.

    ``volume`` is the level ``n`` of the ball the observable lives in. When
    omitted it is the deepest level touched.
    """

    sites: Mapping[VertexCoord, PauliOp] = field(default_factory=dict)
    volume: int | None = None

    def __post_init__(self):
        self.sites = dict(self.sites)
        deepest = max((v.level for v in self.sites), default=0)
        if self.volume is None:
            self.volume = deepest
        elif deepest > self.volume:
            raise SupportError(f"observable reaches level {deepest}, outside volume {self.volume}")

    def __str__(self):
        return format_observable(self)

    def trace(self):
        """Normalized trace; factorizes over sites."""
        out = 1.0
        for op in self.sites.values():
            out *= op.a0
        return _real_if_exact(out) if isinstance(out, complex) else out

    def matrix(self, sites: list[VertexCoord]) -> np.ndarray:
        """Dense matrix on ``sites`` (first site is the most significant tensor factor)."""
        out = np.ones((1, 1), dtype=complex)
        for v in sites:
            out = np.kron(out, self.sites.get(v, IDENTITY).matrix())
        return out


def product_diagonal_part(a: ProductObservable) -> ProductObservable:
    sites = {}
    for v, op in a.sites.items():
        d = diagonal_part(op)
        sites[v] = PauliOp(d.a0, 0.0, 0.0, d.a3)
    return ProductObservable(sites, a.volume)


def parse_observable(text: str, volume: int | None = None) -> ProductObservable:
    """Parse ``"1.1:Z,2:I"``-style text; an empty string is the identity."""
    sites: dict[VertexCoord, PauliOp] = {}
    for entry in filter(None, (e.strip() for e in text.split(","))):
        site, sep, label = entry.partition(":")
        if not sep:
            raise ParamError(f"observable entry {entry!r} is not of the form site:P")
        v = VertexCoord.parse(site)
        if v in sites:
            raise ParamError(f"site {v} listed twice")
        sites[v] = PauliOp.from_label(label)
    return ProductObservable(sites, volume)


def format_observable(a: ProductObservable) -> str:
    labels = {(1, 0, 0, 0): "I", (0, 1, 0, 0): "X", (0, 0, 1, 0): "Y", (0, 0, 0, 1): "Z"}
    parts = []
    for v in sorted(a.sites):
        label = labels.get(tuple(a.sites[v].coeffs))
        if label is None:
            raise ParamError(f"site {v} does not carry a single Pauli matrix")
        parts.append(f"{v}:{label}")
    return ",".join(parts)
