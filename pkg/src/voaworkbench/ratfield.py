"""Exact arithmetic on multivariate rational functions with restricted poles.

The coefficient ring of the whole workbench: rational functions in z_1..z_n
whose denominators are products of powers of z_i and (z_i - z_j), i < j.
Everything is exact (``fractions.Fraction``); canonical forms make equality
a structural comparison.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

Q = Fraction

__all__ = [
    "Q",
    "MultiPoly",
    "RatFunc",
    "Permutation",
    "RegionSeries",
    "PoleLocusError",
    "NonStabilization",
    "InsufficientDepth",
    "expand_region",
    "reconstruct",
    "reconstruct_univariate",
    "univariate_expansion",
    "identify_and_exclude",
]


class PoleLocusError(ValueError):
    """A pole outside {z_i = 0} u {z_i = z_j} would be produced."""


class NonStabilization(ValueError):
    """A truncated series is not rational within the supplied pole ansatz."""


class InsufficientDepth(ValueError):
    """The series window is too shallow to certify a reconstruction."""


# ---------------------------------------------------------------------------
# polynomials


class MultiPoly:
    """Sparse polynomial: map from exponent vectors to nonzero Fractions."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[tuple, Q] | None = None):
        self.n = n
        t = {}
        if terms:
            for e, c in terms.items():
                c = Q(c)
                if c:
                    t[tuple(e)] = c
        self.terms = t

    @classmethod
    def zero(cls, n: int) -> "MultiPoly":
        return cls(n)

    @classmethod
    def const(cls, n: int, c) -> "MultiPoly":
        return cls(n, {tuple([0] * n): Q(c)})

    @classmethod
    def var(cls, n: int, i: int) -> "MultiPoly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): Q(1)})

    @classmethod
    def diff(cls, n: int, i: int, j: int) -> "MultiPoly":
        """The factor z_i - z_j."""
        ei = [0] * n
        ei[i] = 1
        ej = [0] * n
        ej[j] = 1
        return cls(n, {tuple(ei): Q(1), tuple(ej): Q(-1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if self.n != other.n:
            raise ValueError("variable-count mismatch")
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e, Q(0)) + c
            if s:
                t[e] = s
            else:
                t.pop(e, None)
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def __neg__(self) -> "MultiPoly":
        out = MultiPoly(self.n)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        if self.n != other.n:
            raise ValueError("variable-count mismatch")
        t: dict[tuple, Q] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = t.get(e, Q(0)) + c1 * c2
                if s:
                    t[e] = s
                else:
                    t.pop(e, None)
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def scale(self, c) -> "MultiPoly":
        c = Q(c)
        out = MultiPoly(self.n)
        if c:
            out.terms = {e: cc * c for e, cc in self.terms.items()}
        return out

    def mul_monomial(self, exp: tuple, c=Q(1)) -> "MultiPoly":
        c = Q(c)
        out = MultiPoly(self.n)
        if c:
            out.terms = {
                tuple(a + b for a, b in zip(e, exp)): cc * c for e, cc in self.terms.items()
            }
        return out

    def pow(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative power")
        r = MultiPoly.const(self.n, 1)
        b = self
        while k:
            if k & 1:
                r = r * b
            k >>= 1
            if k:
                b = b * b
        return r

    def deriv(self, i: int) -> "MultiPoly":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                e2 = tuple(e2)
                s = t.get(e2, Q(0)) + c * e[i]
                if s:
                    t[e2] = s
                else:
                    t.pop(e2, None)
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def subs_shift(self, i: int, j: int) -> "MultiPoly":
        """Substitute z_i -> z_i - z_j (binomial expansion)."""
        t: dict[tuple, Q] = {}
        for e, c in self.terms.items():
            k = e[i]
            for m in range(k + 1):
                e2 = list(e)
                e2[i] = m
                e2[j] += k - m
                e2 = tuple(e2)
                coeff = c * math.comb(k, m) * (-1) ** (k - m)
                s = t.get(e2, Q(0)) + coeff
                if s:
                    t[e2] = s
                else:
                    t.pop(e2, None)
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def subs_value(self, i: int, val) -> "MultiPoly":
        val = Q(val)
        t: dict[tuple, Q] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            k = e2[i]
            e2[i] = 0
            e2 = tuple(e2)
            s = t.get(e2, Q(0)) + c * val**k
            if s:
                t[e2] = s
            else:
                t.pop(e2, None)
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def subs_var(self, i: int, j: int) -> "MultiPoly":
        """Substitute z_i -> z_j (identification of parameters)."""
        t: dict[tuple, Q] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            k = e2[i]
            e2[i] = 0
            e2[j] += k
            e2 = tuple(e2)
            s = t.get(e2, Q(0)) + c
            if s:
                t[e2] = s
            else:
                t.pop(e2, None)
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def permute(self, images: tuple) -> "MultiPoly":
        """Rename variable k to images[k] (a bijection on 0..n-1)."""
        t = {}
        for e, c in self.terms.items():
            e2 = [0] * self.n
            for k, ek in enumerate(e):
                e2[images[k]] = ek
            t[tuple(e2)] = c
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def embed(self, n_new: int, varmap: Mapping[int, int]) -> "MultiPoly":
        t = {}
        for e, c in self.terms.items():
            e2 = [0] * n_new
            for k, ek in enumerate(e):
                if ek:
                    e2[varmap[k]] = ek
            t[tuple(e2)] = c
        out = MultiPoly(n_new)
        out.terms = t
        return out

    def scale_vars(self, lam) -> "MultiPoly":
        lam = Q(lam)
        out = MultiPoly(self.n)
        out.terms = {e: c * lam ** sum(e) for e, c in self.terms.items()}
        return out

    def divide_by_var(self, i: int) -> "MultiPoly | None":
        t = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                return None
            e2 = list(e)
            e2[i] -= 1
            t[tuple(e2)] = c
        out = MultiPoly(self.n)
        out.terms = t
        return out

    def divide_by_diff(self, i: int, j: int) -> "MultiPoly | None":
        """Exact quotient by (z_i - z_j), or None when not divisible."""
        if self.subs_var(i, j):
            return None
        rem = self
        quot = MultiPoly.zero(self.n)
        fac = MultiPoly.diff(self.n, i, j)
        while rem:
            d = max(e[i] for e in rem.terms)
            if d == 0:
                return None
            lead = MultiPoly(self.n, {e: c for e, c in rem.terms.items() if e[i] == d})
            qpart = lead.divide_by_var(i)
            quot = quot + qpart
            rem = rem - qpart * fac
        return quot

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def var_degree(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def split_by_var(self, i: int) -> dict[int, "MultiPoly"]:
        """Coefficients of powers of z_i (z_i zeroed out in the keys)."""
        parts: dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[i]
            e2 = list(e)
            e2[i] = 0
            parts.setdefault(k, {})[tuple(e2)] = c
        return {k: MultiPoly(self.n, t) for k, t in parts.items()}

    def __repr__(self):
        return f"MultiPoly({poly_to_str(self)})"


def poly_to_str(p: MultiPoly, names: list[str] | None = None) -> str:
    if not p.terms:
        return "0"
    names = names or [f"z{k + 1}" for k in range(p.n)]
    pieces = []
    for e, c in sorted(p.terms.items(), reverse=True):
        mon = "*".join(
            names[k] + (f"^{ek}" if ek != 1 else "") for k, ek in enumerate(e) if ek
        )
        pieces.append(str(c) + ("*" + mon if mon else ""))
    return " + ".join(pieces).replace("+ -", "- ")


def poly_from_str(s: str, n: int, names: list[str] | None = None) -> MultiPoly:
    names = names or [f"z{k + 1}" for k in range(n)]
    index = {nm: k for k, nm in enumerate(names)}
    s = s.strip()
    if s == "0":
        return MultiPoly.zero(n)
    s = s.replace("- ", "+ -")
    terms: dict[tuple, Q] = {}
    for piece in s.split("+ "):
        piece = piece.strip()
        if not piece:
            continue
        e = [0] * n
        coeff = Q(1)
        for tok in piece.split("*"):
            tok = tok.strip()
            if not tok:
                continue
            head = tok.lstrip("-").split("/")[0]
            if head.isdigit() or (tok.startswith("-") and head.isdigit()):
                coeff *= Q(tok)
            else:
                if "^" in tok:
                    nm, pw = tok.split("^")
                    e[index[nm]] += int(pw)
                else:
                    e[index[tok]] += 1
        key = tuple(e)
        val = terms.get(key, Q(0)) + coeff
        if val:
            terms[key] = val
        else:
            terms.pop(key, None)
    return MultiPoly(n, terms)


# ---------------------------------------------------------------------------
# permutations


class Permutation:
    """Bijection on {0..n-1} with cached sign."""

    __slots__ = ("n", "images", "sign")

    def __init__(self, images: Iterable[int]):
        self.images = tuple(images)
        self.n = len(self.images)
        if sorted(self.images) != list(range(self.n)):
            raise ValueError("not a bijection")
        inv = sum(
            1
            for a in range(self.n)
            for b in range(a + 1, self.n)
            if self.images[a] > self.images[b]
        )
        self.sign = -1 if inv % 2 else 1

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_one_line(cls, word: Iterable[int]) -> "Permutation":
        """Paper notation sigma_{i_1..i_n}: sigma(j) = i_j, 1-based."""
        return cls([i - 1 for i in word])

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        img = list(range(n))
        img[a], img[b] = img[b], img[a]
        return cls(img)

    def __call__(self, k: int) -> int:
        return self.images[k]

    def compose(self, other: "Permutation") -> "Permutation":
        """(self o other)(k) = self(other(k))."""
        return Permutation(self.images[other.images[k]] for k in range(self.n))

    def inverse(self) -> "Permutation":
        img = [0] * self.n
        for k, v in enumerate(self.images):
            img[v] = k
        return Permutation(img)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"Permutation({list(self.images)})"


# ---------------------------------------------------------------------------
# rational functions


def _diff_key(i: int, j: int) -> tuple:
    return (i, j) if i < j else (j, i)


class RatFunc:
    """numerator / (prod z_i^axis[i] * prod_{i<j} (z_i-z_j)^diff[(i,j)]).

    Canonical: the numerator is divisible by no active denominator factor;
    the zero function has empty numerator and no poles. Equality is
    structural equality of the canonical data.
    """

    __slots__ = ("n", "num", "axis", "diff")

    def __init__(self, num: MultiPoly, axis=None, diff=None):
        self.n = num.n
        axis = list(axis) if axis is not None else [0] * self.n
        diff = {_diff_key(*k): v for k, v in (diff or {}).items() if v}
        if num.is_zero():
            axis = [0] * self.n
            diff = {}
        else:
            for i in range(self.n):
                while axis[i] > 0:
                    q = num.divide_by_var(i)
                    if q is None:
                        break
                    num = q
                    axis[i] -= 1
            for key in list(diff):
                while diff[key] > 0:
                    q = num.divide_by_diff(*key)
                    if q is None:
                        break
                    num = q
                    diff[key] -= 1
                if not diff[key]:
                    del diff[key]
        if any(a < 0 for a in axis) or any(v < 0 for v in diff.values()):
            raise ValueError("negative pole order")
        self.num = num
        self.axis = tuple(axis)
        self.diff = dict(diff)

    @classmethod
    def zero(cls, n: int) -> "RatFunc":
        return cls(MultiPoly.zero(n))

    @classmethod
    def const(cls, n: int, c) -> "RatFunc":
        return cls(MultiPoly.const(n, c))

    @classmethod
    def var(cls, n: int, i: int) -> "RatFunc":
        return cls(MultiPoly.var(n, i))

    @classmethod
    def monomial_inv(cls, n: int, i: int, k: int = 1) -> "RatFunc":
        """1 / z_i^k."""
        return cls(MultiPoly.const(n, 1), axis=[k if t == i else 0 for t in range(n)])

    @classmethod
    def diff_inv(cls, n: int, i: int, j: int, k: int = 1) -> "RatFunc":
        """1 / (z_i - z_j)^k, sign absorbed when i > j."""
        c = (-1) ** k if i > j else 1
        return cls(MultiPoly.const(n, c), diff={_diff_key(i, j): k})

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        return (
            isinstance(other, RatFunc)
            and self.n == other.n
            and self.axis == other.axis
            and self.diff == other.diff
            and self.num == other.num
        )

    def __hash__(self):
        return hash((self.n, self.axis, frozenset(self.diff.items()), self.num))

    def _den_poly(self) -> MultiPoly:
        d = MultiPoly.const(self.n, 1)
        for i, a in enumerate(self.axis):
            if a:
                d = d.mul_monomial(tuple(a if t == i else 0 for t in range(self.n)))
        for (i, j), b in self.diff.items():
            d = d * MultiPoly.diff(self.n, i, j).pow(b)
        return d

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if self.n != other.n:
            raise ValueError("variable-count mismatch")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        axis = [max(a, b) for a, b in zip(self.axis, other.axis)]
        keys = set(self.diff) | set(other.diff)
        diff = {k: max(self.diff.get(k, 0), other.diff.get(k, 0)) for k in keys}

        def complement(f: RatFunc) -> MultiPoly:
            c = MultiPoly.const(self.n, 1)
            for i in range(self.n):
                d = axis[i] - f.axis[i]
                if d:
                    c = c.mul_monomial(tuple(d if t == i else 0 for t in range(self.n)))
            for k in keys:
                d = diff[k] - f.diff.get(k, 0)
                if d:
                    c = c * MultiPoly.diff(self.n, *k).pow(d)
            return c

        num = self.num * complement(self) + other.num * complement(other)
        return RatFunc(num, axis, diff)

    def __neg__(self) -> "RatFunc":
        out = RatFunc.__new__(RatFunc)
        out.n = self.n
        out.num = -self.num
        out.axis = self.axis
        out.diff = dict(self.diff)
        return out

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        if self.n != other.n:
            raise ValueError("variable-count mismatch")
        if self.is_zero() or other.is_zero():
            return RatFunc.zero(self.n)
        axis = [a + b for a, b in zip(self.axis, other.axis)]
        diff = dict(self.diff)
        for k, v in other.diff.items():
            diff[k] = diff.get(k, 0) + v
        return RatFunc(self.num * other.num, axis, diff)

    def scale(self, c) -> "RatFunc":
        c = Q(c)
        if not c:
            return RatFunc.zero(self.n)
        out = RatFunc.__new__(RatFunc)
        out.n = self.n
        out.num = self.num.scale(c)
        out.axis = self.axis
        out.diff = dict(self.diff)
        return out

    def pow(self, k: int) -> "RatFunc":
        r = RatFunc.const(self.n, 1)
        for _ in range(k):
            r = r * self
        return r

    def partial(self, i: int) -> "RatFunc":
        """Exact quotient-rule derivative with respect to z_i."""
        if not (0 <= i < self.n):
            raise IndexError("variable index out of range")
        out = RatFunc(self.num.deriv(i), self.axis, self.diff)
        if self.axis[i]:
            axis = list(self.axis)
            axis[i] += 1
            out = out + RatFunc(self.num.scale(-self.axis[i]), axis, self.diff)
        for (p, q), b in self.diff.items():
            if i == p or i == q:
                sgn = -b if i == p else b
                diff = dict(self.diff)
                diff[(p, q)] += 1
                out = out + RatFunc(self.num.scale(sgn), self.axis, diff)
        return out

    def permute(self, sigma: Permutation) -> "RatFunc":
        """Replace z_k by z_{sigma(k)}; factors re-ordered with sign."""
        if sigma.n != self.n:
            raise ValueError("permutation size mismatch")
        num = self.num.permute(sigma.images)
        axis = [0] * self.n
        for k, a in enumerate(self.axis):
            axis[sigma(k)] = a
        diff = {}
        flip = 0
        for (p, q), b in self.diff.items():
            p2, q2 = sigma(p), sigma(q)
            if p2 > q2:
                flip += b
            diff[_diff_key(p2, q2)] = b
        if flip % 2:
            num = -num
        return RatFunc(num, axis, diff)

    def shift_substitute(self, i: int, j: int) -> "RatFunc":
        """Substitute z_i -> z_i - z_j; error when a non-locus pole appears."""
        if i == j:
            raise ValueError("indices must differ")
        for (p, q) in self.diff:
            if i in (p, q):
                raise PoleLocusError(
                    f"substituting z{i + 1} -> z{i + 1}-z{j + 1} moves pole "
                    f"(z{p + 1}-z{q + 1}) outside the allowed locus"
                )
        num = self.num.subs_shift(i, j)
        axis = list(self.axis)
        diff = dict(self.diff)
        moved = axis[i]
        axis[i] = 0
        if moved:
            key = _diff_key(i, j)
            diff[key] = diff.get(key, 0) + moved
            if i > j and moved % 2:
                num = -num
        return RatFunc(num, axis, diff)

    def scale_all_vars(self, lam) -> "RatFunc":
        """z_i -> lam z_i for every i (lam a nonzero exact rational)."""
        lam = Q(lam)
        if not lam:
            raise ValueError("lambda must be nonzero")
        num = self.num.scale_vars(lam)
        shift = lam ** (-(sum(self.axis) + sum(self.diff.values())))
        return RatFunc(num.scale(shift), self.axis, self.diff)

    def embed(self, n_new: int, varmap: Mapping[int, int]) -> "RatFunc":
        """Move to a ring with n_new variables; unused variables may be absent
        from varmap."""
        num = self.num.embed(n_new, varmap)
        axis = [0] * n_new
        for k, a in enumerate(self.axis):
            if a:
                axis[varmap[k]] = a
        diff: dict[tuple, int] = {}
        sgn = 1
        for (p, q), b in self.diff.items():
            p2, q2 = varmap[p], varmap[q]
            if p2 > q2:
                sgn *= (-1) ** b
            diff[_diff_key(p2, q2)] = diff.get(_diff_key(p2, q2), 0) + b
        if sgn < 0:
            num = -num
        return RatFunc(num, axis, diff)

    def insert_var(self, pos: int) -> "RatFunc":
        """Embed into a ring with one more variable, inserted at index pos."""
        varmap = {k: (k if k < pos else k + 1) for k in range(self.n)}
        return self.embed(self.n + 1, varmap)

    def var_used(self, i: int) -> bool:
        if self.axis[i]:
            return True
        if any(i in k for k in self.diff):
            return True
        return any(e[i] for e in self.num.terms)

    def total_degree(self) -> int:
        """Degree at infinity: numerator degree minus denominator degree."""
        return self.num.total_degree() - sum(self.axis) - sum(self.diff.values())

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.num.terms}) <= 1

    def eval_all(self, values: list[Q]) -> Q:
        """Evaluate at an exact rational point off the pole locus."""
        num = Q(0)
        for e, c in self.num.terms.items():
            v = c
            for k, ek in enumerate(e):
                v *= Q(values[k]) ** ek
            num += v
        den = Q(1)
        for i, a in enumerate(self.axis):
            den *= Q(values[i]) ** a
        for (p, q), b in self.diff.items():
            den *= (Q(values[p]) - Q(values[q])) ** b
        if den == 0:
            raise ZeroDivisionError("evaluation point on the pole locus")
        return num / den

    def to_obj(self, names: list[str] | None = None) -> dict:
        names = names or [f"z{k + 1}" for k in range(self.n)]
        den = []
        for i, a in enumerate(self.axis):
            if a:
                den.append([names[i], a])
        for (p, q), b in sorted(self.diff.items()):
            den.append([f"{names[p]}-{names[q]}", b])
        return {"n": self.n, "num": poly_to_str(self.num, names), "den": den}

    @classmethod
    def from_obj(cls, obj: dict, names: list[str] | None = None) -> "RatFunc":
        n = obj["n"]
        names = names or [f"z{k + 1}" for k in range(n)]
        index = {nm: k for k, nm in enumerate(names)}
        num = poly_from_str(obj["num"], n, names)
        axis = [0] * n
        diff = {}
        for nm, k in obj["den"]:
            if "-" in nm:
                a, b = nm.split("-")
                diff[_diff_key(index[a], index[b])] = k
            else:
                axis[index[nm]] = k
        return cls(num, axis, diff)

    def __repr__(self):
        o = self.to_obj()
        if not o["den"]:
            return f"RatFunc({o['num']})"
        den = "*".join(f"({nm})^{k}" if k != 1 else f"({nm})" for nm, k in o["den"])
        return f"RatFunc(({o['num']}) / {den})"


# ---------------------------------------------------------------------------
# regional Laurent expansion


class RegionSeries:
    """Truncated Laurent expansion in |z_{region[0]}| > |z_{region[1]}| > ...

    Formal path-wise truncation: a term is kept when its geometric depth
    (the total subordinate power drawn from difference-factor expansions)
    is at most ``depth``.
    """

    __slots__ = ("n", "region", "depth", "terms")

    def __init__(self, n: int, region: tuple, depth: int, terms: dict):
        self.n = n
        self.region = tuple(region)
        self.depth = depth
        self.terms = {tuple(e): Q(c) for e, c in terms.items() if c}

    def __eq__(self, other):
        return (
            isinstance(other, RegionSeries)
            and self.region == other.region
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"RegionSeries(region={self.region}, depth={self.depth}, {len(self.terms)} terms)"


def expand_region(f: RatFunc, order: int, region: Iterable[int] | None = None) -> RegionSeries:
    """Laurent-expand f in the region |z_region[0]| > |z_region[1]| > ...

    Keeps every expansion path of geometric depth <= order. Used as an
    oracle and for round-trip verification of reconstructions.
    """
    region = tuple(region) if region is not None else tuple(range(f.n))
    pos = {v: k for k, v in enumerate(region)}
    n = f.n
    # depth-graded accumulation: cur[depth][exponent] = coefficient
    cur: list[dict[tuple, Q]] = [dict() for _ in range(order + 1)]
    for e, c in f.num.terms.items():
        e2 = tuple(a - b for a, b in zip(e, f.axis))
        cur[0][e2] = cur[0].get(e2, Q(0)) + c
    for (p, q), b in sorted(f.diff.items()):
        big, small = (p, q) if pos[p] < pos[q] else (q, p)
        sign = Q(1) if big == p else Q((-1) ** b)
        nxt: list[dict[tuple, Q]] = [dict() for _ in range(order + 1)]
        for d, layer in enumerate(cur):
            for e, c in layer.items():
                for k in range(0, order - d + 1):
                    coeff = c * sign * math.comb(b - 1 + k, k)
                    e2 = list(e)
                    e2[small] += k
                    e2[big] -= b + k
                    e2 = tuple(e2)
                    tgt = nxt[d + k]
                    s = tgt.get(e2, Q(0)) + coeff
                    if s:
                        tgt[e2] = s
                    else:
                        tgt.pop(e2, None)
        cur = nxt
    out: dict[tuple, Q] = {}
    for layer in cur:
        for e, c in layer.items():
            s = out.get(e, Q(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return RegionSeries(n, region, order, out)


def reconstruct(
    series: RegionSeries,
    axis: Iterable[int],
    diff: Mapping[tuple, int],
    deg_bound: int | None = None,
    margin: int = 2,
) -> RatFunc:
    """Recover the unique RatFunc within the pole ansatz matching the series.

    Solves exactly for the numerator coefficients against the expansions of
    candidate monomials over the ansatz denominator; NonStabilization when
    inconsistent, InsufficientDepth when underdetermined at this depth.
    """
    n = series.n
    axis = list(axis)
    diff = {_diff_key(*k): v for k, v in diff.items() if v}
    den_deg = sum(axis) + sum(diff.values())
    if deg_bound is None:
        degs = {sum(e) for e in series.terms}
        if len(degs) > 1:
            raise ValueError("need deg_bound for an inhomogeneous series")
        deg_bound = (degs.pop() if degs else 0) + den_deg
    if deg_bound < 0:
        deg_bound = -1  # numerator must be zero
    if series.depth < margin:
        raise InsufficientDepth(f"series depth {series.depth} below margin {margin}")

    # candidate monomials: exponents bounded per-variable by deg_bound
    candidates: list[tuple] = []

    def gen(prefix, rest, budget):
        if not rest:
            candidates.append(tuple(prefix))
            return
        for k in range(budget + 1):
            gen(prefix + [k], rest - 1, budget - k)

    gen([], n, max(deg_bound, 0))

    expansions = {}
    for g in candidates:
        mono = RatFunc(MultiPoly(n, {g: Q(1)}), axis, diff)
        expansions[g] = expand_region(mono, series.depth, series.region).terms

    support = set(series.terms)
    for terms in expansions.values():
        support |= set(terms)
    support = sorted(support)

    rows = []
    rhs = []
    for e in support:
        rows.append([expansions[g].get(e, Q(0)) for g in candidates])
        rhs.append(series.terms.get(e, Q(0)))

    sol = _solve_exact(rows, rhs)
    if sol is None:
        raise NonStabilization("series is not rational within the pole ansatz")
    coeffs, free = sol
    if free:
        raise InsufficientDepth("reconstruction underdetermined at this depth")
    num = MultiPoly(n, {g: c for g, c in zip(candidates, coeffs) if c})
    result = RatFunc(num, axis, diff)
    back = expand_region(result, series.depth, series.region)
    if back.terms != series.terms:
        raise NonStabilization("round-trip expansion mismatch")
    return result


def _solve_exact(rows: list[list[Q]], rhs: list[Q]):
    """Gaussian elimination over Fractions.

    Returns (solution, free_columns) or None when inconsistent.
    """
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    nrows = len(m)
    ncols = len(rows[0]) if rows else 0
    piv_rows = []
    r = 0
    for c in range(ncols):
        p = None
        for rr in range(r, nrows):
            if m[rr][c]:
                p = rr
                break
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for rr in range(nrows):
            if rr != r and m[rr][c]:
                f = m[rr][c]
                m[rr] = [x - f * y for x, y in zip(m[rr], m[r])]
        piv_rows.append(c)
        r += 1
        if r == nrows:
            break
    for rr in range(r, nrows):
        if m[rr][ncols]:
            return None
    sol = [Q(0)] * ncols
    for k, c in enumerate(piv_rows):
        sol[c] = m[k][ncols]
    free = [c for c in range(ncols) if c not in piv_rows]
    return sol, free


# ---------------------------------------------------------------------------
# univariate expansion / reconstruction (the engines' workhorse)


def univariate_expansion(
    f: RatFunc,
    t: int,
    lo: int,
    hi: int,
    center: int | None = None,
) -> dict[int, RatFunc]:
    """Coefficients of f as a series in z_t (center None: |z_t| > others)
    or in u = z_t - z_center (|u| small), for exponents in [lo, hi].

    Coefficients are RatFuncs in which z_t is unused.
    """
    n = f.n
    parts = f.num.split_by_var(t)
    other_axis = list(f.axis)
    a_t = other_axis[t]
    other_axis[t] = 0
    other_diff = {}
    t_diffs = []  # (j, order, sign) with the factor written as sign/(z_t - z_j)^order
    for (p, q), b in f.diff.items():
        if t == p:
            t_diffs.append((q, b, Q(1)))
        elif t == q:
            t_diffs.append((p, b, Q((-1) ** b)))
        else:
            other_diff[(p, q)] = b
    base = RatFunc(MultiPoly.const(n, 1), other_axis, other_diff)

    cur: dict[int, RatFunc] = {}
    if center is None:
        for k, pk in parts.items():
            e = k - a_t
            prev = cur.get(e)
            val = RatFunc(pk)
            cur[e] = prev + val if prev is not None else val
        pending = sum(b for _, b, _ in t_diffs)
        for j, b, sgn in t_diffs:
            pending -= b
            nxt: dict[int, RatFunc] = {}
            for e, c in cur.items():
                kmax = e - b - (lo + pending)
                for k in range(0, kmax + 1):
                    coeff = c.scale(sgn * math.comb(b - 1 + k, k)) * RatFunc(
                        MultiPoly.var(n, j).pow(k)
                    )
                    e2 = e - b - k
                    prev = nxt.get(e2)
                    nxt[e2] = prev + coeff if prev is not None else coeff
            cur = nxt
    else:
        j0 = center
        # numerator: z_t = z_j0 + u
        for k, pk in parts.items():
            for m in range(k + 1):
                e2 = tuple(k - m if kk == j0 else 0 for kk in range(n))
                val = RatFunc(pk.mul_monomial(e2, math.comb(k, m)))
                prev = cur.get(m)
                cur[m] = prev + val if prev is not None else val
        # drop everything above the reachable window early
        shift_down = sum(b for j, b, _ in t_diffs if j == j0)
        def prune(d: dict[int, RatFunc], top: int) -> dict[int, RatFunc]:
            return {e: c for e, c in d.items() if e <= top}
        cur = prune(cur, hi + shift_down)
        if a_t:
            # 1/(z_j0 + u)^a = sum_k C(a-1+k,k) (-1)^k z_j0^{-a-k} u^k
            nxt = {}
            for e, c in cur.items():
                for k in range(0, hi + shift_down - e + 1):
                    coeff = c * RatFunc.monomial_inv(n, j0, a_t + k).scale(
                        math.comb(a_t - 1 + k, k) * (-1) ** k
                    )
                    prev = nxt.get(e + k)
                    nxt[e + k] = prev + coeff if prev is not None else coeff
            cur = nxt
        for j, b, sgn in t_diffs:
            if j == j0:
                shift_down -= b
                cur = {e - b: c.scale(sgn) for e, c in cur.items()}
                cur = prune(cur, hi + shift_down)
                continue
            # 1/((z_j0 - z_j) + u)^b = sum_k C(b-1+k,k)(-1)^k u^k / (z_j0-z_j)^{b+k}
            nxt = {}
            for e, c in cur.items():
                for k in range(0, hi + shift_down - e + 1):
                    coeff = c.scale(sgn * math.comb(b - 1 + k, k) * (-1) ** k) * (
                        RatFunc.diff_inv(n, j0, j, b + k)
                    )
                    prev = nxt.get(e + k)
                    nxt[e + k] = prev + coeff if prev is not None else coeff
            cur = nxt
    out: dict[int, RatFunc] = {}
    for e, c in cur.items():
        if lo <= e <= hi:
            val = c * base
            if not val.is_zero():
                out[e] = val
    return out


def reconstruct_univariate(
    coeffs: Mapping[int, RatFunc],
    n: int,
    t: int,
    lo: int,
    hi: int,
    axis_order: int,
    diff_orders: Mapping[int, int],
    center: int | None = None,
    deg_bound: int | None = None,
    margin: int = 2,
    verify: bool = True,
) -> RatFunc:
    """Reconstruct a rational function of z_t from a coefficient window.

    coeffs[e] is the exact coefficient of z_t^e (center None) or of
    (z_t - z_center)^e, as a RatFunc not using z_t, for lo <= e <= hi.
    Around infinity the series is known-zero above hi and unknown below lo;
    around a center it is known-zero below lo and unknown above hi.
    """
    diff_orders = {j: b for j, b in diff_orders.items() if b and j != t}
    H = axis_order + sum(diff_orders.values())
    zero = RatFunc.zero(n)

    # denominator as a polynomial in z_t (center None) or u (center j0)
    dpoly: dict[int, RatFunc] = {0: RatFunc.const(n, 1)}

    def dmul(fac: dict[int, RatFunc]):
        nonlocal dpoly
        out: dict[int, RatFunc] = {}
        for e1, c1 in dpoly.items():
            for e2, c2 in fac.items():
                prev = out.get(e1 + e2)
                val = c1 * c2
                out[e1 + e2] = prev + val if prev is not None else val
        dpoly = {e: c for e, c in out.items() if not c.is_zero()}

    if center is None:
        if axis_order:
            dpoly = {e + axis_order: c for e, c in dpoly.items()}
        for j, b in diff_orders.items():
            lin = {1: RatFunc.const(n, 1), 0: RatFunc.var(n, j).scale(-1)}
            for _ in range(b):
                dmul(lin)
    else:
        j0 = center
        if axis_order:
            lin = {1: RatFunc.const(n, 1), 0: RatFunc.var(n, j0)}
            for _ in range(axis_order):
                dmul(lin)
        for j, b in diff_orders.items():
            if j == j0:
                dpoly = {e + b: c for e, c in dpoly.items()}
            else:
                lin = {1: RatFunc.const(n, 1), 0: RatFunc(MultiPoly.diff(n, j0, j))}
                for _ in range(b):
                    dmul(lin)

    Hmax = max(dpoly)

    def cval(e: int) -> RatFunc | None:
        if lo <= e <= hi:
            return coeffs.get(e, zero)
        if center is None:
            return zero if e > hi else None
        return zero if e < lo else None

    P: dict[int, RatFunc] = {}
    grange = range(lo + Hmax, hi + Hmax + 1) if center is None else range(lo, hi + 1)
    for g in grange:
        tot = zero
        ok = True
        for h, dc in dpoly.items():
            c = cval(g - h)
            if c is None:
                ok = False
                break
            if not c.is_zero():
                tot = tot + c * dc
        if ok:
            P[g] = tot

    if center is None:
        safe_lo = lo + Hmax
        if safe_lo > -margin:
            raise InsufficientDepth(
                f"window floor {lo} leaves fewer than margin={margin} "
                f"negative-power checks (denominator degree {Hmax})"
            )
        for g in range(safe_lo, 0):
            if g in P and not P[g].is_zero():
                raise NonStabilization(
                    f"z^{g} residual nonzero: series not rational within ansatz"
                )
        num_coeffs = {
            g: P[g] for g in range(0, hi + Hmax + 1) if g in P and not P[g].is_zero()
        }
    else:
        if deg_bound is None:
            raise ValueError("difference-mode reconstruction needs deg_bound")
        if hi < deg_bound + margin:
            raise InsufficientDepth(
                f"window top {hi} below deg_bound {deg_bound} + margin {margin}"
            )
        for g in range(lo, 0):
            if g in P and not P[g].is_zero():
                raise NonStabilization(f"u^{g} residual nonzero (negative power)")
        for g in range(deg_bound + 1, hi + 1):
            if g in P and not P[g].is_zero():
                raise NonStabilization(
                    f"u^{g} residual nonzero beyond degree bound {deg_bound}"
                )
        num_coeffs = {
            g: P[g]
            for g in range(0, min(deg_bound, hi) + 1)
            if g in P and not P[g].is_zero()
        }

    axis = [axis_order if k == t else 0 for k in range(n)]
    diff = {_diff_key(t, j): b for j, b in diff_orders.items()}
    sgn = Q(1)
    for j, b in diff_orders.items():
        if t > j:
            sgn *= (-1) ** b
    inv = RatFunc(MultiPoly.const(n, 1).scale(sgn), axis, diff)

    result = RatFunc.zero(n)
    if center is None:
        for g, c in num_coeffs.items():
            result = result + c * RatFunc(MultiPoly.var(n, t).pow(g))
    else:
        u = RatFunc(MultiPoly.diff(n, t, center))
        for g, c in num_coeffs.items():
            result = result + c * u.pow(g)
    result = result * inv

    if verify:
        back = univariate_expansion(result, t, lo, hi, center)
        for e in range(lo, hi + 1):
            want = coeffs.get(e) or zero
            got = back.get(e) or zero
            if want != got:
                raise NonStabilization(
                    f"verification mismatch at exponent {e} of the window"
                )
    return result


# ---------------------------------------------------------------------------
# parameter identification / exclusion


def identify_and_exclude(f: RatFunc, k: int, pairs: list[tuple]) -> RatFunc:
    """Identify x_i = y_j across the variable split (x_1..x_k | y_1..y_m).

    pairs are 1-based (i, j) with x_i = y_j. Every denominator factor
    (x_i - y_j) belonging to a pair is excluded (dropped) first, then y_j
    is replaced by x_i and removed; remaining variables renumber stably.
    """
    n = f.n
    seen_i, seen_j = set(), set()
    for i, j in pairs:
        if i in seen_i or j in seen_j:
            raise ValueError("pairs must be disjoint per coordinate")
        seen_i.add(i)
        seen_j.add(j)
    num = f.num
    axis = list(f.axis)
    diff = dict(f.diff)
    for i, j in pairs:
        xi = i - 1
        yj = k + j - 1
        key = _diff_key(xi, yj)
        diff.pop(key, None)  # the exclusion: drop the coinciding-pair factor
        num = num.subs_var(yj, xi)
        axis[xi] += axis[yj]
        axis[yj] = 0
        flip = 1
        newdiff: dict[tuple, int] = {}
        for (p, q), b in diff.items():
            p2 = xi if p == yj else p
            q2 = xi if q == yj else q
            if p2 == q2:
                raise PoleLocusError("identification collapses a retained pole factor")
            if p2 > q2:
                flip *= (-1) ** b
            newdiff[_diff_key(p2, q2)] = newdiff.get(_diff_key(p2, q2), 0) + b
        if flip < 0:
            num = -num
        diff = newdiff
    removed = sorted(k + j - 1 for _, j in pairs)
    keep = [v for v in range(n) if v not in removed]
    varmap = {old: new for new, old in enumerate(keep)}
    mid = RatFunc(num, axis, diff)
    for old in removed:
        if mid.var_used(old):
            raise PoleLocusError("excluded variable still present after identification")
    return mid.embed(len(keep), varmap)
