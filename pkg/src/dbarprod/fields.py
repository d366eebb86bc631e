"""Complex-valued functions on product domains and Wirtinger derivatives.

A :class:`FieldFunction` wraps a vectorized evaluator ``func(z1, z2[, z3])``
that broadcasts like a numpy ufunc.  Derivatives are indexed by Wirtinger
multi-indices: a tuple of counts ``(d/dz1, d/dzbar1, d/dz2, d/dzbar2, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

# central-difference step for Wirtinger derivatives
H_FD = 1e-4


def multi_index(arity: int, *terms) -> tuple:
    """Wirtinger multi-index from ``(variable, conjugate)`` terms, variables one-based."""
    idx = [0] * (2 * arity)
    for j, conj in terms:
        idx[2 * (j - 1) + int(bool(conj))] += 1
    return tuple(idx)


def index_order(index) -> int:
    return int(sum(index))


def all_indices(arity: int, order: int) -> list:
    """All Wirtinger multi-indices of exactly the given order."""
    out = [tuple([0] * (2 * arity))]
    for _ in range(order):
        nxt = set()
        for idx in out:
            for p in range(2 * arity):
                new = list(idx)
                new[p] += 1
                nxt.add(tuple(new))
        out = sorted(nxt)
    return out


@dataclass(frozen=True, eq=False)
class FieldFunction:
    """Complex function of ``arity`` complex variables.

    ``deps`` lists the (one-based) variables the function actually depends
    on; operators use it to skip integrations that are known to be trivial.
    ``derivatives`` maps Wirtinger multi-indices to evaluators with the same
    signature as ``func``.
    """

    func: Callable
    arity: int = 2
    deps: Optional[frozenset] = None
    derivatives: Mapping[tuple, Callable] = field(default_factory=dict)
    order: int = 0
    name: str = ""
    costly: bool = False

    def __post_init__(self):
        if self.arity not in (2, 3):
            raise ValueError("arity must be 2 or 3")
        deps = frozenset(range(1, self.arity + 1)) if self.deps is None else frozenset(self.deps)
        object.__setattr__(self, "deps", deps)
        for idx in self.derivatives:
            if len(idx) != 2 * self.arity:
                raise ValueError(f"bad multi-index {idx} for arity {self.arity}")
            if index_order(idx) > self.order:
                raise ValueError("derivative evaluator beyond the declared order")

    def __call__(self, *z):
        if len(z) != self.arity:
            raise TypeError(f"{self.name or 'field'} takes {self.arity} variables, got {len(z)}")
        z = np.broadcast_arrays(*[np.asarray(v, dtype=complex) for v in z])
        out = np.asarray(self.func(*z), dtype=complex)
        return np.broadcast_to(out, z[0].shape).copy() if out.shape != z[0].shape else out

    def at(self, points) -> np.ndarray:
        """Evaluate at an array of points of shape (..., arity)."""
        points = np.asarray(points, dtype=complex)
        return self(*np.moveaxis(points, -1, 0))

    def has_derivative(self, index) -> bool:
        return index_order(index) == 0 or tuple(index) in self.derivatives

    def derivative(self, index, h: float = H_FD) -> "FieldFunction":
        """Wirtinger derivative; analytic when supplied, central differences otherwise."""
        index = tuple(index)
        if index_order(index) == 0:
            return self
        if index in self.derivatives:
            return FieldFunction(self.derivatives[index], self.arity, self.deps,
                                 name=f"D{index}{self.name}")
        # peel one derivative off and difference what remains
        p = next(i for i, c in enumerate(index) if c)
        rest = list(index)
        rest[p] -= 1
        inner = self.derivative(tuple(rest), h)
        return wirtinger(inner, p // 2 + 1, bool(p % 2), h)

    def _combine(self, other, op, name):
        if isinstance(other, FieldFunction):
            if other.arity != self.arity:
                raise ValueError("arity mismatch")
            return FieldFunction(lambda *z: op(self(*z), other(*z)), self.arity,
                                 self.deps | other.deps, name=name,
                                 costly=self.costly or other.costly)
        c = complex(other)
        return FieldFunction(lambda *z: op(self(*z), c), self.arity, self.deps,
                             name=name, costly=self.costly)

    def __add__(self, other):
        return self._combine(other, np.add, f"({self.name}+)")

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract, f"({self.name}-)")

    def __mul__(self, other):
        return self._combine(other, np.multiply, f"({self.name}*)")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def constant(c: complex, arity: int = 2) -> FieldFunction:
    c = complex(c)
    zero = {idx: (lambda *z: np.zeros(np.shape(z[0]), complex)) for idx in all_indices(arity, 1)}
    return FieldFunction(lambda *z: np.full(np.shape(z[0]), c), arity, frozenset(),
                         zero, order=1, name=f"{c}")


def coordinate(j: int, conj: bool = False, arity: int = 2) -> FieldFunction:
    """The function z_j (or its conjugate), with exact first derivatives."""
    derivs = {}
    for idx in all_indices(arity, 1):
        hit = idx == multi_index(arity, (j, conj))
        derivs[idx] = (lambda *z: np.ones(np.shape(z[0]), complex)) if hit else \
            (lambda *z: np.zeros(np.shape(z[0]), complex))
    f = (lambda *z: np.conj(z[j - 1])) if conj else (lambda *z: z[j - 1])
    return FieldFunction(f, arity, frozenset({j}), derivs, order=1,
                         name=f"{'zbar' if conj else 'z'}{j}")


def wirtinger(f: FieldFunction, j: int, conj: bool, h: float = H_FD) -> FieldFunction:
    """Central-difference d/dz_j (or d/dzbar_j) of ``f``.

    d/dzbar = (d/dx + i d/dy) / 2 and d/dz = (d/dx - i d/dy) / 2.
    """
    sign = 1.0 if conj else -1.0

    def deriv(*z):
        def shifted(delta):
            zz = list(z)
            zz[j - 1] = zz[j - 1] + delta
            return f(*zz)

        dx = (shifted(h) - shifted(-h)) / (2 * h)
        dy = (shifted(1j * h) - shifted(-1j * h)) / (2 * h)
        return 0.5 * (dx + sign * 1j * dy)

    return FieldFunction(deriv, f.arity, f.deps if j in f.deps else frozenset(),
                         name=f"fd{'dbar' if conj else 'd'}{j}({f.name})", costly=f.costly)


def dbar(f: FieldFunction, j: int, h: float = H_FD) -> FieldFunction:
    """d/dzbar_j by central differences (ignores analytic derivatives on purpose)."""
    return wirtinger(f, j, True, h)


def dz(f: FieldFunction, j: int, h: float = H_FD) -> FieldFunction:
    return wirtinger(f, j, False, h)
