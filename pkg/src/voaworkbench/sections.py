"""Module-valued rational sections at truncation.

A RationalSection materializes a W-bar-valued rational function as the table
of its pairings <s, F> with every basis state s of weight <= ceiling. The
ring may carry extra inert variables (sewing parameters) after the active
insertion slots; ``tags`` records the differential weight wt(v_i) of each
active slot, ``inert_tags`` the weight budget of each inert slot.
"""

from __future__ import annotations

from fractions import Fraction as Q

from .heisenberg import (
    CutoffExceeded,
    FockState,
    ModuleVector,
    gram_norm,
    states_up_to,
)
from .ratfield import Permutation, RatFunc

__all__ = ["RationalSection"]


class RationalSection:
    __slots__ = ("nv", "active", "ceiling", "tags", "inert_tags", "anchor", "pairings")

    def __init__(
        self,
        nv: int,
        active: int,
        ceiling: int,
        tags: tuple,
        pairings: dict,
        inert_tags: tuple = (),
        anchor: int = 0,
    ):
        self.nv = nv
        self.active = active
        self.ceiling = ceiling
        self.tags = tuple(tags)
        self.inert_tags = tuple(inert_tags)
        self.anchor = anchor
        self.pairings = {s: f for s, f in pairings.items() if not f.is_zero()}
        if len(self.tags) != active or active + len(self.inert_tags) != nv:
            raise ValueError("slot bookkeeping mismatch")

    @classmethod
    def zero(cls, nv, active, ceiling, tags, inert_tags=(), anchor=0):
        return cls(nv, active, ceiling, tags, {}, inert_tags, anchor)

    @classmethod
    def constant(cls, w: ModuleVector, ceiling: int) -> "RationalSection":
        """The 0-slot section of a module vector (pairings are constants)."""
        from .heisenberg import bilinear_form

        pair = {}
        for s in states_up_to(ceiling):
            val = bilinear_form(ModuleVector.basis(s), w)
            if val:
                pair[s] = RatFunc.const(0, val)
        return cls(0, 0, ceiling, (), pair, (), w.max_weight())

    def is_zero(self) -> bool:
        return not self.pairings

    def __eq__(self, other):
        return (
            isinstance(other, RationalSection)
            and self.nv == other.nv
            and self.pairings == other.pairings
        )

    def copy_with(self, **kw) -> "RationalSection":
        data = dict(
            nv=self.nv,
            active=self.active,
            ceiling=self.ceiling,
            tags=self.tags,
            pairings=self.pairings,
            inert_tags=self.inert_tags,
            anchor=self.anchor,
        )
        data.update(kw)
        return RationalSection(**data)

    def __add__(self, other: "RationalSection") -> "RationalSection":
        if self.nv != other.nv or self.active != other.active:
            raise ValueError("section shape mismatch")
        pair = dict(self.pairings)
        for s, f in other.pairings.items():
            g = pair.get(s)
            pair[s] = f if g is None else g + f
        return RationalSection(
            self.nv,
            self.active,
            min(self.ceiling, other.ceiling),
            self.tags,
            pair,
            self.inert_tags,
            max(self.anchor, other.anchor),
        )

    def scale(self, c) -> "RationalSection":
        c = Q(c)
        if not c:
            return RationalSection.zero(
                self.nv, self.active, self.ceiling, self.tags, self.inert_tags, self.anchor
            )
        return self.copy_with(pairings={s: f.scale(c) for s, f in self.pairings.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + other.scale(-1)

    def pairing(self, s: FockState) -> RatFunc:
        if s.weight > self.ceiling:
            raise CutoffExceeded(
                f"pairing at weight {s.weight} above section ceiling {self.ceiling}"
            )
        return self.pairings.get(s, RatFunc.zero(self.nv))

    def pair_vector(self, w: ModuleVector) -> RatFunc:
        out = RatFunc.zero(self.nv)
        for s, c in w.items():
            out = out + self.pairing(s).scale(c)
        return out

    def component(self, s: FockState) -> RatFunc:
        """Coefficient of the basis state s in the lift (diagonal Gram)."""
        return self.pairing(s).scale(1 / gram_norm(s))

    def slice_ceiling(self, ceiling: int) -> "RationalSection":
        if ceiling > self.ceiling:
            raise CutoffExceeded("cannot raise a section ceiling by slicing")
        return self.copy_with(
            ceiling=ceiling,
            pairings={s: f for s, f in self.pairings.items() if s.weight <= ceiling},
        )

    def permute_active(self, sigma: Permutation) -> "RationalSection":
        """Permute the active variables z_k -> z_{sigma(k)}; inerts fixed."""
        if sigma.n != self.active:
            raise ValueError("permutation size mismatch")
        full = Permutation(
            list(sigma.images) + list(range(self.active, self.nv))
        )
        tags = [0] * self.active
        for k, t in enumerate(self.tags):
            tags[sigma(k)] = t
        return self.copy_with(
            tags=tuple(tags),
            pairings={s: f.permute(full) for s, f in self.pairings.items()},
        )

    def map_ratfunc(self, fn) -> "RationalSection":
        pair = {}
        for s, f in self.pairings.items():
            g = fn(f)
            if not g.is_zero():
                pair[s] = g
        return self.copy_with(pairings=pair)

    def scale_weight_action(self, lam) -> "RationalSection":
        """lam^{L(0)} acting on the value: pairing at s scales by lam^{wt s}."""
        lam = Q(lam)
        return self.copy_with(
            pairings={s: f.scale(lam**s.weight) for s, f in self.pairings.items()}
        )
