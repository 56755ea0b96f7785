"""Rank-one Heisenberg (free boson) vertex algebra at central charge 1.

States are partition-indexed Fock vectors a(-n_1)...a(-n_k)|0>; the adjoint
module is the algebra itself. Everything is exact over Fractions, and the
mode action of general vertex operators comes from the normal-ordered
recursion for Y(a(-n)u, z).
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction as Q
from typing import Iterable

__all__ = [
    "FockState",
    "ModuleVector",
    "VACUUM",
    "GEN",
    "CutoffExceeded",
    "mode_action",
    "vertex_mode",
    "vertex_mode_state",
    "virasoro",
    "sugawara_L1",
    "bilinear_form",
    "gram_norm",
    "dual_basis",
    "project_weight",
    "states_of_weight",
    "states_up_to",
    "partitions_of",
]


class CutoffExceeded(ValueError):
    """An operation would need states heavier than the configured cutoff."""


@functools.lru_cache(maxsize=None)
def partitions_of(w: int) -> tuple:
    """All partitions of w as non-increasing tuples."""
    if w == 0:
        return ((),)
    out = []

    def rec(rem, maxpart, acc):
        if rem == 0:
            out.append(tuple(acc))
            return
        for p in range(min(rem, maxpart), 0, -1):
            rec(rem - p, p, acc + [p])

    rec(w, w, [])
    return tuple(out)


class FockState:
    """A basis state a(-n_1)...a(-n_k)|0>, parts non-increasing."""

    __slots__ = ("parts", "weight")
    _interned: dict = {}

    def __new__(cls, parts: Iterable[int]):
        parts = tuple(sorted(parts, reverse=True))
        cached = cls._interned.get(parts)
        if cached is not None:
            return cached
        if any(p <= 0 for p in parts):
            raise ValueError("parts must be positive")
        self = object.__new__(cls)
        self.parts = parts
        self.weight = sum(parts)
        cls._interned[parts] = self
        return self

    def __eq__(self, other):
        return self is other or (isinstance(other, FockState) and self.parts == other.parts)

    def __hash__(self):
        return hash(self.parts)

    def __lt__(self, other):
        return (self.weight, self.parts) < (other.weight, other.parts)

    def __repr__(self):
        return f"FockState({self.to_text()})"

    def to_text(self) -> str:
        if not self.parts:
            return "|0>"
        pieces = []
        k = 0
        while k < len(self.parts):
            p = self.parts[k]
            mult = self.parts.count(p)
            pieces.append(f"a(-{p})" + (f"^{mult}" if mult > 1 else ""))
            k += mult
        return "".join(pieces) + "|0>"

    @classmethod
    def from_text(cls, s: str) -> "FockState":
        s = s.strip()
        if not s.endswith("|0>"):
            raise ValueError(f"bad state text {s!r}")
        body = s[: -len("|0>")]
        parts = []
        while body:
            if not body.startswith("a(-"):
                raise ValueError(f"bad state text {s!r}")
            close = body.index(")")
            p = int(body[3:close])
            body = body[close + 1 :]
            mult = 1
            if body.startswith("^"):
                k = 1
                while k < len(body) and body[k].isdigit():
                    k += 1
                mult = int(body[1:k])
                body = body[k:]
            parts.extend([p] * mult)
        return cls(parts)


VACUUM = FockState(())
GEN = FockState((1,))  # a(-1)|0>, the Heisenberg generator of weight 1


@functools.lru_cache(maxsize=None)
def states_of_weight(w: int) -> tuple:
    return tuple(FockState(p) for p in partitions_of(w))


def states_up_to(k: int) -> list:
    out = []
    for w in range(k + 1):
        out.extend(states_of_weight(w))
    return out


class ModuleVector:
    """Finite exact-rational combination of Fock basis states."""

    __slots__ = ("comps",)

    def __init__(self, comps=None):
        c = {}
        if comps:
            for s, v in comps.items():
                v = Q(v)
                if v:
                    c[s] = v
        self.comps = c

    @classmethod
    def zero(cls) -> "ModuleVector":
        return cls()

    @classmethod
    def basis(cls, state: FockState, c=Q(1)) -> "ModuleVector":
        return cls({state: Q(c)})

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def __add__(self, other):
        c = dict(self.comps)
        for s, v in other.comps.items():
            t = c.get(s, Q(0)) + v
            if t:
                c[s] = t
            else:
                c.pop(s, None)
        out = ModuleVector()
        out.comps = c
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "ModuleVector":
        c = Q(c)
        out = ModuleVector()
        if c:
            out.comps = {s: v * c for s, v in self.comps.items()}
        return out

    def __eq__(self, other):
        return isinstance(other, ModuleVector) and self.comps == other.comps

    def __hash__(self):
        return hash(frozenset(self.comps.items()))

    def items(self):
        return self.comps.items()

    def weights(self) -> set:
        return {s.weight for s in self.comps}

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def weight(self) -> int:
        ws = self.weights()
        if len(ws) != 1:
            raise ValueError("not homogeneous")
        return ws.pop()

    def max_weight(self) -> int:
        return max((s.weight for s in self.comps), default=0)

    def to_obj(self) -> list:
        return [[s.to_text(), str(c)] for s, c in sorted(self.comps.items())]

    @classmethod
    def from_obj(cls, obj) -> "ModuleVector":
        return cls({FockState.from_text(t): Q(c) for t, c in obj})

    def __repr__(self):
        if not self.comps:
            return "ModuleVector(0)"
        return "ModuleVector(" + " + ".join(
            f"{c}*{s.to_text()}" for s, c in sorted(self.comps.items())
        ) + ")"


def mode_action(m: int, vec: ModuleVector) -> ModuleVector:
    """Heisenberg mode a(m): creation for m < 0, [a(m), a(n)] = m delta_{m+n,0}."""
    out = ModuleVector.zero()
    for s, c in vec.comps.items():
        out = out + _mode_on_state(m, s).scale(c)
    return out


@functools.lru_cache(maxsize=None)
def _mode_on_state(m: int, s: FockState) -> ModuleVector:
    if m == 0:
        return ModuleVector.zero()
    if m < 0:
        return ModuleVector.basis(FockState(s.parts + (-m,)))
    mult = s.parts.count(m)
    if not mult:
        return ModuleVector.zero()
    rest = list(s.parts)
    rest.remove(m)
    return ModuleVector.basis(FockState(rest), Q(m * mult))


@functools.lru_cache(maxsize=None)
def _vertex_mode_states(v: FockState, p: int, w: FockState) -> ModuleVector:
    """The mode (Y(v, z))_p acting on w, via the normal-ordered recursion
    Y(a(-n)u, z) = (1/(n-1)!) :(d^{n-1}a)(z) Y(u, z): ."""
    if not v.parts:
        return ModuleVector.basis(w) if p == -1 else ModuleVector.zero()
    n = v.parts[0]
    u = FockState(v.parts[1:])
    out = ModuleVector.zero()
    fact = Q(1, math.factorial(n - 1))

    def cf(m: int) -> Q:
        c = Q(1)
        for i in range(1, n):
            c *= -m - i
        return c * fact

    # creation part: sum_{m <= -1} cf(m) a(m) u(p - m - n) w
    m = -1
    lo = p - n - u.weight - w.weight + 1
    while m >= lo:
        inner = _vertex_mode_states(u, p - m - n, w)
        if inner:
            out = out + mode_action(m, inner).scale(cf(m))
        m -= 1
    # annihilation part: sum_{m >= 0} cf(m) u(p - m - n) a(m) w
    for m in range(0, w.weight + 1):
        hit = _mode_on_state(m, w)
        if hit:
            out = out + _vertex_mode_states(u, p - m - n, next(iter(hit.comps))).scale(
                cf(m) * next(iter(hit.comps.values()))
            )
    return out


def vertex_mode_state(v: FockState, p: int, w: FockState) -> ModuleVector:
    return _vertex_mode_states(v, p, w)


def vertex_mode(v: ModuleVector, p: int, w: ModuleVector) -> ModuleVector:
    """The mode v(p) acting on w, extended bilinearly."""
    out = ModuleVector.zero()
    for sv, cv in v.comps.items():
        for sw, cw in w.comps.items():
            out = out + _vertex_mode_states(sv, p, sw).scale(cv * cw)
    return out


def virasoro(k: int, vec: ModuleVector) -> ModuleVector:
    """L(k) for k in {-1, 0, 1}; [L(k), a(-n)] = n a(-n+k), L(k)|0> = 0."""
    if k not in (-1, 0, 1):
        raise ValueError("only L(-1), L(0), L(1) are exposed")
    out = ModuleVector.zero()
    for s, c in vec.comps.items():
        if k == 0:
            out = out + ModuleVector.basis(s, c * s.weight)
            continue
        for idx, p in enumerate(s.parts):
            newpart = p - k  # a(-n) -> a(-(n - k)); k=-1 raises, k=1 lowers
            rest = s.parts[:idx] + s.parts[idx + 1 :]
            if newpart == 0:
                continue  # a(0) kills the charge-zero module
            out = out + ModuleVector.basis(FockState(rest + (newpart,)), c * p)
    return out


def sugawara_L1(vec: ModuleVector) -> ModuleVector:
    """Independent oracle: L(1) = sum_{k>=1} a(-k) a(k+1); the k = 0 term
    a(0)a(1) vanishes on the charge-zero module."""
    out = ModuleVector.zero()
    for k in range(1, vec.max_weight() + 2):
        step = mode_action(k + 1, vec)
        if step:
            out = out + mode_action(-k, step)
    return out


def bilinear_form(a: ModuleVector, b: ModuleVector, lam=Q(1)) -> Q:
    """Invariant form <.,.>_lam with <1,1> = 1; adjoint a(m)^+ =
    (-1)^{m+1} lam^{2m} a(-m)."""
    lam = Q(lam)
    tot = Q(0)
    for sa, ca in a.comps.items():
        for sb, cb in b.comps.items():
            tot += ca * cb * _form_states(sa, sb, lam)
    return tot


@functools.lru_cache(maxsize=None)
def _form_states(a: FockState, b: FockState, lam: Q) -> Q:
    if a.weight != b.weight:
        return Q(0)
    if not a.parts:
        return Q(1) if not b.parts else Q(0)
    n = a.parts[0]
    rest = FockState(a.parts[1:])
    moved = _mode_on_state(n, b)
    coeff = Q((-1) ** (n + 1)) * lam ** (-2 * n)
    tot = Q(0)
    for sb, cb in moved.comps.items():
        tot += cb * _form_states(rest, sb, lam)
    return coeff * tot


def gram_norm(s: FockState, lam=Q(1)) -> Q:
    return _form_states(s, s, Q(lam))


def dual_basis(l: int, lam=Q(1)) -> tuple:
    """Bases ({u^alpha}, {bar u^beta}) of weight l with <u^a, bar u^b> = delta.

    Obtained by exact Gram-matrix inversion (the Gram matrix is diagonal in
    the partition basis, but the inversion is done generally)."""
    lam = Q(lam)
    basis = list(states_of_weight(l))
    m = len(basis)
    gram = [
        [_form_states(basis[i], basis[j], lam) for j in range(m)] for i in range(m)
    ]
    inv = _invert_exact(gram)
    if inv is None:
        raise ValueError(f"singular Gram matrix at weight {l}")
    duals = []
    for beta in range(m):
        vec = ModuleVector.zero()
        for i in range(m):
            if inv[i][beta]:
                vec = vec + ModuleVector.basis(basis[i], inv[i][beta])
        duals.append(vec)
    return [ModuleVector.basis(s) for s in basis], duals


def _invert_exact(mat):
    m = len(mat)
    aug = [list(row) + [Q(1) if i == j else Q(0) for j in range(m)] for i, row in enumerate(mat)]
    for col in range(m):
        piv = None
        for r in range(col, m):
            if aug[r][col]:
                piv = r
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[m:] for row in aug]


def project_weight(m: int, vec: ModuleVector) -> ModuleVector:
    out = ModuleVector()
    out.comps = {s: c for s, c in vec.comps.items() if s.weight == m}
    return out


def exp_virasoro(k: int, coeff, vec: ModuleVector, max_weight: int | None = None) -> ModuleVector:
    """exp(coeff * L(k)) applied exactly; for k = 1 the series terminates,
    for k = -1 a max_weight cap is required."""
    coeff = Q(coeff)
    out = ModuleVector.zero() + vec
    term = vec
    j = 1
    while True:
        term = virasoro(k, term).scale(coeff / j)
        if k == -1 and max_weight is not None:
            term = ModuleVector(
                {s: c for s, c in term.comps.items() if s.weight <= max_weight}
            )
        if term.is_zero():
            break
        out = out + term
        j += 1
        if j > 10_000:
            raise RuntimeError("exp series failed to terminate")
    return out
