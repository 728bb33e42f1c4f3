"""Monomial and posynomial algebra over named positive variables.

Coefficients are kept as natural logs so that products of very small
physical constants (k-coefficients times microwatt amplitudes) never
underflow. A posynomial is stored as a coefficient vector plus a dense
exponent matrix over its own sorted variable tuple.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence, Union

import numpy as np
from scipy.special import logsumexp

Number = Union[int, float]


def _check_point(point: Mapping[str, float], names: Iterable[str]) -> np.ndarray:
    try:
        vals = np.array([point[n] for n in names], dtype=float)
    except KeyError as exc:
        raise KeyError(f"no value for variable {exc.args[0]!r}") from None
    if np.any(~(vals > 0)):
        bad = [n for n, v in zip(names, vals) if not v > 0]
        raise ValueError(f"evaluation point must be strictly positive; got nonpositive {bad}")
    return vals


class Monomial:
    """``c * prod(x_i ** a_i)`` with ``c > 0``."""

    __slots__ = ("log_coeff", "exponents")

    def __init__(self, coeff: float = 1.0, exponents: Mapping[str, float] | None = None,
                 *, log_coeff: float | None = None):
        if log_coeff is None:
            if not coeff > 0:
                raise ValueError(f"monomial coefficient must be positive, got {coeff}")
            log_coeff = float(np.log(coeff))
        self.log_coeff = float(log_coeff)
        self.exponents = {k: float(v) for k, v in (exponents or {}).items() if v != 0}

    @classmethod
    def var(cls, name: str) -> "Monomial":
        return cls(1.0, {name: 1.0})

    @property
    def coeff(self) -> float:
        return float(np.exp(self.log_coeff))

    @property
    def variables(self) -> frozenset:
        return frozenset(self.exponents)

    def key(self) -> tuple:
        return tuple(sorted(self.exponents.items()))

    def log_evaluate(self, point: Mapping[str, float]) -> float:
        names = sorted(self.exponents)
        vals = _check_point(point, names)
        a = np.array([self.exponents[n] for n in names])
        return self.log_coeff + float(a @ np.log(vals)) if names else self.log_coeff

    def evaluate(self, point: Mapping[str, float]) -> float:
        return float(np.exp(self.log_evaluate(point)))

    __call__ = evaluate

    def __mul__(self, other):
        if isinstance(other, Monomial):
            exps = dict(self.exponents)
            for k, v in other.exponents.items():
                exps[k] = exps.get(k, 0.0) + v
            return Monomial(exponents=exps, log_coeff=self.log_coeff + other.log_coeff)
        if isinstance(other, Posynomial):
            return other * self
        if isinstance(other, (int, float, np.floating)):
            if not other > 0:
                raise ValueError("monomials can only be scaled by positive numbers")
            return Monomial(exponents=self.exponents, log_coeff=self.log_coeff + np.log(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Monomial):
            return self * other ** -1
        if isinstance(other, (int, float, np.floating)):
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return self ** -1 * other
        return NotImplemented

    def __pow__(self, e: Number) -> "Monomial":
        e = float(e)
        return Monomial(exponents={k: v * e for k, v in self.exponents.items()},
                        log_coeff=self.log_coeff * e)

    def __add__(self, other):
        return Posynomial([self]) + other

    __radd__ = __add__

    def __eq__(self, other):
        if not isinstance(other, Monomial):
            return NotImplemented
        return self.key() == other.key() and np.isclose(self.log_coeff, other.log_coeff,
                                                        rtol=0, atol=1e-12)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = " * ".join(f"{k}^{v:g}" for k, v in sorted(self.exponents.items()))
        return f"Monomial({self.coeff:.6g}{' * ' + body if body else ''})"


class Posynomial:
    """Sum of monomials; like terms are merged unless ``merge=False``.

    Internally a posynomial holds ``log_coeffs`` (K,) and ``exponents``
    (K, n) over ``names`` (sorted, length n). Build it from monomials or,
    for large generated expressions, with :meth:`from_arrays`.
    """

    __slots__ = ("names", "log_coeffs", "exponents")

    def __init__(self, terms: Iterable[Monomial | Number], *, merge: bool = True):
        terms = [t if isinstance(t, Monomial) else Monomial(float(t)) for t in terms]
        if not terms:
            raise ValueError("a posynomial needs at least one term")
        names = sorted(set().union(*(t.exponents for t in terms)))
        idx = {n: i for i, n in enumerate(names)}
        E = np.zeros((len(terms), len(names)))
        for r, t in enumerate(terms):
            for k, v in t.exponents.items():
                E[r, idx[k]] = v
        lc = np.array([t.log_coeff for t in terms])
        if merge:
            self.names, self.log_coeffs, self.exponents = _merge(tuple(names), lc, E)
        else:
            # keep like terms apart, e.g. to condense them with separate weights
            self.names, self.log_coeffs, self.exponents = tuple(names), lc, E

    @classmethod
    def from_arrays(cls, names: Sequence[str], log_coeffs, exponents, *, merge: bool = True):
        obj = cls.__new__(cls)
        lc = np.asarray(log_coeffs, dtype=float).reshape(-1)
        E = np.asarray(exponents, dtype=float).reshape(lc.size, len(names))
        if lc.size == 0:
            raise ValueError("a posynomial needs at least one term")
        if not np.all(np.isfinite(lc)):
            raise ValueError("posynomial coefficients must be positive and finite")
        if merge:
            obj.names, obj.log_coeffs, obj.exponents = _merge(tuple(names), lc, E)
        else:
            obj.names, obj.log_coeffs, obj.exponents = tuple(names), lc, E
        return obj

    @property
    def terms(self) -> list[Monomial]:
        return [Monomial(exponents=dict(zip(self.names, row)), log_coeff=lc)
                for lc, row in zip(self.log_coeffs, self.exponents)]

    def __len__(self):
        return self.log_coeffs.size

    @property
    def variables(self) -> frozenset:
        used = np.any(self.exponents != 0, axis=0)
        return frozenset(n for n, u in zip(self.names, used) if u)

    def compile(self, index: Mapping[str, int], nvars: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(b, F)`` with ``log g_k(x) = b_k + F_k @ log(x)`` in the given layout."""
        F = np.zeros((len(self), nvars))
        for j, n in enumerate(self.names):
            if n in index:
                F[:, index[n]] = self.exponents[:, j]
            elif np.any(self.exponents[:, j] != 0):
                raise KeyError(f"variable {n!r} is not declared")
        return self.log_coeffs.copy(), F

    def term_logs(self, point: Mapping[str, float]) -> np.ndarray:
        vals = _check_point(point, self.names)
        return self.log_coeffs + self.exponents @ np.log(vals)

    def log_evaluate(self, point: Mapping[str, float]) -> float:
        return float(logsumexp(self.term_logs(point)))

    def evaluate(self, point: Mapping[str, float]) -> float:
        return float(np.exp(self.log_evaluate(point)))

    __call__ = evaluate

    def _aligned(self, other: "Posynomial"):
        names = tuple(sorted(set(self.names) | set(other.names)))
        return names, _embed(self, names), _embed(other, names)

    def __add__(self, other):
        if isinstance(other, (int, float, np.floating)):
            other = Posynomial([Monomial(float(other))])
        elif isinstance(other, Monomial):
            other = Posynomial([other])
        elif not isinstance(other, Posynomial):
            return NotImplemented
        names, E1, E2 = self._aligned(other)
        return Posynomial.from_arrays(names, np.concatenate([self.log_coeffs, other.log_coeffs]),
                                      np.vstack([E1, E2]))

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            other = Monomial(float(other))
        if isinstance(other, Monomial):
            other = Posynomial([other])
        if not isinstance(other, Posynomial):
            return NotImplemented
        names, E1, E2 = self._aligned(other)
        lc = (self.log_coeffs[:, None] + other.log_coeffs[None, :]).reshape(-1)
        E = (E1[:, None, :] + E2[None, :, :]).reshape(-1, len(names))
        return Posynomial.from_arrays(names, lc, E)

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by a positive scalar or a monomial keeps the result a posynomial."""
        if isinstance(other, (int, float, np.floating)):
            if not other > 0:
                raise ValueError("can only divide a posynomial by a positive number")
            other = Monomial(float(other))
        if not isinstance(other, Monomial):
            return NotImplemented
        return self * other ** -1

    def __pow__(self, k: int) -> "Posynomial":
        if int(k) != k or k < 1:
            raise ValueError("posynomials only support positive integer powers")
        out = self
        for _ in range(int(k) - 1):
            out = out * self
        return out

    def __repr__(self):
        return f"Posynomial({len(self)} terms over {len(self.names)} variables)"

    def dump(self) -> str:
        """Human-readable listing of every term, one per line."""
        lines = []
        for lc, row in zip(self.log_coeffs, self.exponents):
            exps = " ".join(f"{n}^{v:g}" for n, v in zip(self.names, row) if v != 0)
            lines.append(f"{np.exp(lc):.17g}  {exps}".rstrip())
        return "\n".join(lines)


def _embed(p: Posynomial, names: tuple) -> np.ndarray:
    if p.names == names:
        return p.exponents
    E = np.zeros((len(p), len(names)))
    pos = {n: i for i, n in enumerate(names)}
    for j, n in enumerate(p.names):
        E[:, pos[n]] = p.exponents[:, j]
    return E


def _merge(names: tuple, lc: np.ndarray, E: np.ndarray):
    if lc.size == 1:
        return names, lc, E
    if E.shape[1] == 0:
        return names, np.array([logsumexp(lc)]), np.zeros((1, 0))
    uniq, inv = np.unique(E, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    if uniq.shape[0] == lc.size:
        order = np.argsort(inv)
        return names, lc[order], uniq
    shift = np.max(lc)
    acc = np.zeros(uniq.shape[0])
    np.add.at(acc, inv, np.exp(lc - shift))
    return names, np.log(acc) + shift, uniq


def as_posynomial(p: Monomial | Posynomial) -> Posynomial:
    return p if isinstance(p, Posynomial) else Posynomial([p])


def multiply(a, b) -> Posynomial:
    return as_posynomial(a) * as_posynomial(b)


def add(a, b) -> Posynomial:
    return as_posynomial(a) + as_posynomial(b)


def power(m: Monomial, e: Number) -> Monomial:
    return m ** e


def evaluate(p, point: Mapping[str, float]) -> float:
    return p.evaluate(point)


def weights_from_point(p: Monomial | Posynomial, point: Mapping[str, float]) -> np.ndarray:
    """Share of each term in ``p(point)``; these are the tight AM-GM weights."""
    logs = as_posynomial(p).term_logs(point)
    return np.exp(logs - logsumexp(logs))


def condense(p: Monomial | Posynomial, gamma, *, tol: float = 1e-9) -> Monomial:
    """Monomial lower bound ``prod_k (g_k / gamma_k) ** gamma_k`` of ``p``.

    Terms with zero weight drop out of the product.
    """
    p = as_posynomial(p)
    gamma = np.asarray(gamma, dtype=float).reshape(-1)
    if gamma.size != len(p):
        raise ValueError(f"expected {len(p)} weights, got {gamma.size}")
    if np.any(gamma < 0) or abs(gamma.sum() - 1.0) > tol:
        raise ValueError(f"weights must be nonnegative and sum to 1 (sum={gamma.sum():.12g})")
    log_c, exps = condense_arrays(p.log_coeffs, p.exponents, gamma)
    return Monomial(exponents=dict(zip(p.names, exps)), log_coeff=log_c)


def condense_arrays(log_coeffs: np.ndarray, exponents: np.ndarray, gamma: np.ndarray):
    """Array form of :func:`condense`: returns ``(log_coeff, exponent_vector)``."""
    live = gamma > 0
    g = gamma[live]
    log_c = float(g @ (log_coeffs[live] - np.log(g)))
    return log_c, g @ exponents[live]
