"""Double-complex cochains at truncation.

A Cochain is a degree-n, composability-m table from n-tuples of basis states
to RationalSections. Tables are recipe-backed and lazy: entries (including
ones heavier than the verified input cutoff K, which the coboundary's
difference-mode reconstructions need) are produced on demand from the
cochain's construction recipe and memoized.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction as Q

from .heisenberg import (
    CutoffExceeded,
    FockState,
    ModuleVector,
    VACUUM,
    bilinear_form,
    states_of_weight,
    states_up_to,
    virasoro,
)
from .ratfield import Permutation, RatFunc
from .sections import RationalSection
from .correlators import MARGIN, compose_left, e_section, left_ceiling_chain

__all__ = [
    "Cochain",
    "enumerate_tuples",
    "zero_cochain",
    "from_module_vector",
    "from_YW",
    "from_E",
    "linear_combination",
    "sigma_act",
    "corrupted",
    "random_valid",
    "generate",
    "validate_lder",
    "validate_l0",
    "validate_shuffle",
    "shuffles",
    "inverse_shuffles",
    "check_composability",
    "compose_E_left",
    "compose_E_right",
]


def enumerate_tuples(n: int, k: int, total: int | None = None) -> list:
    """Basis tuples with per-slot weight <= k and total weight <= total."""
    if n == 0:
        return [()]
    pool = states_up_to(k)
    out = []
    for tup in itertools.product(pool, repeat=n):
        if total is not None and sum(s.weight for s in tup) > total:
            continue
        out.append(tup)
    return out


class Cochain:
    """Element of C^n_m(V, W-bar) as a lazy table of sections."""

    def __init__(
        self,
        degree: int,
        comp_m,
        cutoff: int,
        entry_fn,
        anchor: int = 0,
        inert_tags: tuple = (),
        label: str = "",
        flags: dict | None = None,
        w_mult: int = 1,
    ):
        self.degree = degree
        self.comp_m = comp_m
        self.cutoff = cutoff
        self.anchor = anchor
        self.w_mult = w_mult
        self.inert_tags = tuple(inert_tags)
        self.label = label or f"cochain(n={degree},m={comp_m})"
        self.flags = dict(flags or {})
        self._entry_fn = entry_fn
        self._memo: dict = {}

    @property
    def nv(self) -> int:
        return self.degree + len(self.inert_tags)

    def entry(self, states: tuple, ceiling: int) -> RationalSection:
        states = tuple(states)
        if len(states) != self.degree:
            raise ValueError("tuple length does not match the degree")
        hit = self._memo.get(states)
        if hit is not None and hit.ceiling >= ceiling:
            return hit.slice_ceiling(ceiling) if hit.ceiling > ceiling else hit
        sec = self._entry_fn(states, ceiling)
        self._memo[states] = sec
        return sec

    def evaluate(self, vectors: tuple, ceiling: int) -> RationalSection:
        """Multilinear extension of the table to ModuleVector inputs."""
        if len(vectors) != self.degree:
            raise ValueError("input arity mismatch")
        for v in vectors:
            if v.max_weight() > self.cutoff:
                raise CutoffExceeded("input weight above the cochain cutoff")
        tags = tuple(
            max((s.weight for s in v.comps), default=0) for v in vectors
        )
        acc = RationalSection.zero(
            self.nv, self.degree, ceiling, tags, self.inert_tags, self.anchor
        )
        for combo in itertools.product(*(list(v.items()) for v in vectors)):
            states = tuple(s for s, _ in combo)
            coeff = Q(1)
            for _, c in combo:
                coeff *= c
            sec = self.entry(states, ceiling)
            acc = acc + sec.copy_with(tags=tags).scale(coeff)
        return acc

    def materialize(self, tuples, ceiling: int) -> dict:
        return {t: self.entry(t, ceiling) for t in tuples}

    def to_obj(self, tuples, ceiling: int) -> dict:
        table = {}
        for t in tuples:
            sec = self.entry(t, ceiling)
            key = ";".join(s.to_text() for s in t) if t else "()"
            table[key] = {
                "tags": list(sec.tags),
                "pairings": {
                    s.to_text(): f.to_obj() for s, f in sorted(sec.pairings.items())
                },
            }
        return {
            "degree": self.degree,
            "m": self.comp_m,
            "cutoff": self.cutoff,
            "ceiling": ceiling,
            "anchor": self.anchor,
            "flags": self.flags,
            "label": self.label,
            "table": table,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "Cochain":
        degree = obj["degree"]
        ceiling = obj["ceiling"]
        table = {}
        for key, entry in obj["table"].items():
            states = (
                tuple(FockState.from_text(p) for p in key.split(";")) if key != "()" else ()
            )
            pair = {
                FockState.from_text(s): RatFunc.from_obj(o)
                for s, o in entry["pairings"].items()
            }
            table[states] = RationalSection(
                degree, degree, ceiling, tuple(entry["tags"]), pair,
                (), obj.get("anchor", 0),
            )

        def entry_fn(states, ceil):
            sec = table.get(tuple(states))
            if sec is None:
                raise CutoffExceeded(
                    f"stored table has no entry for {states} (raw tables do not extend)"
                )
            if ceil > sec.ceiling:
                raise CutoffExceeded(
                    f"stored table ceiling {sec.ceiling} below requested {ceil}"
                )
            return sec.slice_ceiling(ceil)

        return cls(
            degree,
            obj["m"],
            obj["cutoff"],
            entry_fn,
            obj.get("anchor", 0),
            (),
            obj.get("label", "loaded"),
            obj.get("flags"),
        )


def _tags_of(states: tuple) -> tuple:
    return tuple(s.weight for s in states)


# ---------------------------------------------------------------------------
# generators


def zero_cochain(n: int, m, cutoff: int) -> Cochain:
    def entry_fn(states, ceiling):
        return RationalSection.zero(n, n, ceiling, _tags_of(states))

    c = Cochain(n, m, cutoff, entry_fn, 0, (), f"zero(n={n},m={m})")
    c.flags = {"lder": "verified", "l0": "verified", "shuffle": "verified",
               "composable": "verified", "lder2": "verified"}
    c.structural_zero = True
    return c


def from_module_vector(w: ModuleVector, m=3, cutoff: int = 4) -> Cochain:
    def entry_fn(states, ceiling):
        return RationalSection.constant(w, ceiling)

    anchor = 0 if w == ModuleVector.basis(VACUUM) else w.max_weight()
    return Cochain(0, m, cutoff, entry_fn, anchor, (), f"const({w!r})")


def from_E(n: int, w: ModuleVector, m, cutoff: int = 4) -> Cochain:
    """(v_1..v_n) -> E^{(n)}_W(v_1..v_n; w)."""
    anchor = 0 if w == ModuleVector.basis(VACUUM) else w.max_weight()

    def entry_fn(states, ceiling):
        return e_section(states, w, ceiling)

    return Cochain(n, m, cutoff, entry_fn, anchor, (), f"E({n};{w!r})")


def from_YW(w: ModuleVector, m=2, cutoff: int = 4) -> Cochain:
    """(v, z) -> Y_W(v, z) w, the canonical 1-cochain."""
    return from_E(1, w, m, cutoff)


def linear_combination(parts, label="lin") -> Cochain:
    """Exact-rational combination of cochains of one degree."""
    parts = [(Q(c), f) for c, f in parts if c]
    if not parts:
        raise ValueError("empty combination; use zero_cochain")
    degree = parts[0][1].degree
    cutoff = min(f.cutoff for _, f in parts)
    m = min(f.comp_m for _, f in parts)
    anchor = max(f.anchor for _, f in parts)
    if any(f.degree != degree or f.inert_tags for _, f in parts):
        raise ValueError("mismatched shapes in combination")

    def entry_fn(states, ceiling):
        acc = RationalSection.zero(degree, degree, ceiling, _tags_of(states), (), anchor)
        for c, f in parts:
            acc = acc + f.entry(states, ceiling).scale(c)
        return acc.copy_with(anchor=anchor)

    out = Cochain(degree, m, cutoff, entry_fn, anchor, (), label)
    out.w_mult = parts[0][1].w_mult
    if any(f.w_mult != out.w_mult for _, f in parts):
        raise ValueError("mixed homogeneity multipliers in combination")
    return out


def sigma_act(sigma: Permutation, phi: Cochain) -> Cochain:
    """sigma(Phi)(v_1..v_n)(z_1..z_n) = Phi(v_s(1)..v_s(n))(z_s(1)..z_s(n))."""
    if sigma.n != phi.degree:
        raise ValueError("permutation size mismatch")

    def entry_fn(states, ceiling):
        permuted = tuple(states[sigma(k)] for k in range(sigma.n))
        base = phi.entry(permuted, ceiling)
        return base.permute_active(sigma)

    return Cochain(
        phi.degree, phi.comp_m, phi.cutoff, entry_fn, phi.anchor,
        phi.inert_tags, f"sigma{list(sigma.images)}[{phi.label}]", dict(phi.flags),
        phi.w_mult,
    )


def corrupted(phi: Cochain, where: tuple, factor: RatFunc, label="corrupted") -> Cochain:
    """Negative control: the section at one tuple is multiplied by factor."""
    where = tuple(where)

    def entry_fn(states, ceiling):
        base = phi.entry(states, ceiling)
        if tuple(states) == where:
            return base.map_ratfunc(lambda f: f * factor)
        return base

    return Cochain(
        phi.degree, phi.comp_m, phi.cutoff, entry_fn, phi.anchor,
        phi.inert_tags, label, w_mult=phi.w_mult,
    )


def random_valid(n: int, m, seed: int, cutoff: int = 4, anchor_weight: int = 1) -> Cochain:
    """Seeded exact-rational combination of E-built cochains sharing one
    generator weight (so the anchored conjugation law has a single weight)."""
    rng = random.Random(seed)
    ws = list(states_of_weight(anchor_weight))
    parts = []
    for _ in range(rng.randint(1, min(3, len(ws) + 1))):
        w = ModuleVector.basis(rng.choice(ws))
        c = Q(rng.randint(-3, 3), rng.randint(1, 3))
        if c:
            parts.append((c, from_E(n, w, m, cutoff)))
    if not parts:
        parts = [(Q(1), from_E(n, ModuleVector.basis(ws[0]), m, cutoff))]
    out = linear_combination(parts, label=f"random_valid(n={n},m={m},seed={seed})")
    return out


def generate(kind: str, **kw) -> Cochain:
    if kind == "from_module_vector":
        return from_module_vector(kw["w"], kw.get("m", 3), kw.get("cutoff", 4))
    if kind == "from_YW":
        return from_YW(kw["w"], kw.get("m", 2), kw.get("cutoff", 4))
    if kind == "from_E":
        return from_E(kw["n"], kw["w"], kw.get("m", 1), kw.get("cutoff", 4))
    if kind == "zero":
        return zero_cochain(kw["n"], kw["m"], kw.get("cutoff", 4))
    if kind == "random_valid":
        return random_valid(
            kw["n"], kw["m"], kw["seed"], kw.get("cutoff", 4), kw.get("anchor_weight", 1)
        )
    raise ValueError(f"unknown generator kind {kind!r}")


# ---------------------------------------------------------------------------
# validators


def validate_lder(phi: Cochain, tuples, ceiling: int) -> dict:
    """(i): d/dz_i of every pairing equals the L(-1)v_i insertion, slot-wise.
    (ii): sum_i d/dz_i equals the form-adjoint transport of L_W(-1); this
    literal reading holds exactly for vacuum-anchored cochains (reported).
    """
    fails1 = []
    fails2 = []
    for t in tuples:
        sec = phi.entry(t, ceiling)
        derivative_sum = {}
        for i, v in enumerate(t):
            lv = virasoro(-1, ModuleVector.basis(v))
            inserted = RationalSection.zero(
                phi.nv, phi.degree, ceiling, sec.tags, phi.inert_tags, phi.anchor
            )
            for s2, c in lv.items():
                t2 = t[:i] + (s2,) + t[i + 1 :]
                inserted = inserted + phi.entry(t2, ceiling).copy_with(
                    tags=sec.tags
                ).scale(c)
            for wt_state in states_up_to(ceiling):
                lhs = sec.pairings.get(wt_state, RatFunc.zero(phi.nv)).partial(i)
                rhs = inserted.pairings.get(wt_state, RatFunc.zero(phi.nv))
                if lhs != rhs:
                    fails1.append((t, i, wt_state))
                d = derivative_sum.get(wt_state, RatFunc.zero(phi.nv))
                derivative_sum[wt_state] = d + lhs
        for wt_state in states_up_to(ceiling):
            lhs = derivative_sum.get(wt_state, RatFunc.zero(phi.nv))
            # <w~, L(-1).F> := -<L(1) w~, F>
            rhs = RatFunc.zero(phi.nv)
            for s2, c in virasoro(1, ModuleVector.basis(wt_state)).items():
                rhs = rhs + sec.pairings.get(s2, RatFunc.zero(phi.nv)).scale(-c)
            if lhs != rhs:
                fails2.append((t, wt_state))
    return {
        "lder1": "verified" if not fails1 else "failed",
        "lder2": "verified" if not fails2 else "failed",
        "witnesses1": fails1[:3],
        "witnesses2": fails2[:3],
    }


def validate_l0(phi: Cochain, tuples, ceiling: int, lams=(Q(2), Q(3), Q(-1))) -> dict:
    """Anchored L(0)-conjugation: lam^{L_W(0)} Phi(v, z) =
    lam^{anchor} Phi(lam^{L(0)} v, lam z); the anchor carries the generating
    module weight (the differential-tag restatement of the scaling law)."""
    fails = []
    for t in tuples:
        sec = phi.entry(t, ceiling)
        wsum = sum(s.weight for s in t)
        for lam in lams:
            for wt_state, f in sec.pairings.items():
                lhs = f.scale(Q(lam) ** wt_state.weight)
                rhs = f.scale_all_vars(lam).scale(
                    Q(lam) ** (wsum + phi.anchor)
                )
                if lhs != rhs:
                    fails.append((t, str(lam), wt_state))
    return {"l0": "verified" if not fails else "failed", "witnesses": fails[:3]}


def shuffles(l: int, s: int) -> list:
    """J_{l;s}: permutations preserving the order of 1..s and s+1..l."""
    out = []
    for positions in itertools.combinations(range(l), s):
        img = [0] * l
        rest = [k for k in range(l) if k not in positions]
        for a, p in enumerate(positions):
            img[a] = p
        for b, p in enumerate(rest):
            img[s + b] = p
        out.append(Permutation(img))
    return out


def inverse_shuffles(l: int, s: int) -> list:
    return [p.inverse() for p in shuffles(l, s)]


def validate_shuffle(phi: Cochain, tuples, ceiling: int) -> dict:
    """sum over J^{-1}_{l;s} of (-1)^{|sigma|} sigma(Phi) = 0, l = degree."""
    l = phi.degree
    fails = []
    if l >= 2:
        for s in range(1, l):
            group = inverse_shuffles(l, s)
            for t in tuples:
                acc = None
                for sg in group:
                    term = sigma_act(sg, phi).entry(t, ceiling)
                    term = term.scale(sg.sign)
                    acc = term if acc is None else acc + term
                if acc is not None and not acc.is_zero():
                    fails.append((t, s))
    return {"shuffle": "verified" if not fails else "failed", "witnesses": fails[:3]}


def check_composability(phi: Cochain, m: int, ceiling: int = 2, probes=None) -> dict:
    """Operational surrogate for composability with m vertex operators:
    left compositions with up to m insertions must reconstruct (stabilize),
    and the observed pole orders must respect the weight-additive bounds
    N(v_i, v_j) = wt v_i + wt v_j. Returns the tightest observed bounds."""
    from .ratfield import InsufficientDepth, NonStabilization
    from .heisenberg import GEN

    probes = probes or [GEN]
    sample = enumerate_tuples(phi.degree, min(phi.cutoff, 1))
    observed: dict = {}
    failures = []
    for count in range(1, m + 1):
        states = tuple(probes[:1] * count)
        for t in sample:
            try:
                chain = left_ceiling_chain(
                    states, _tags_of(t), phi.inert_tags, phi.anchor, ceiling
                )
                base = phi.entry(t, chain[-1])
                sec = compose_left(states, base, ceiling)
            except (InsufficientDepth, NonStabilization) as exc:
                failures.append((count, t, str(exc)))
                continue
            wts = [s.weight for s in states] + list(_tags_of(t))
            for f in sec.pairings.values():
                for (i, j), b in f.diff.items():
                    bound = wts[i] + wts[j]
                    key = (wts[i], wts[j])
                    observed[key] = max(observed.get(key, 0), b)
                    if b > bound:
                        failures.append((count, t, f"pole order {b} > bound {bound}"))
    return {
        "composable": "verified" if not failures else "failed",
        "m": m,
        "observed_bounds": {f"{k}": v for k, v in sorted(observed.items())},
        "failures": failures[:5],
    }


def validate_all(phi: Cochain, tuples, ceiling: int) -> dict:
    r1 = validate_lder(phi, tuples, ceiling)
    r2 = validate_l0(phi, tuples, ceiling)
    r3 = validate_shuffle(phi, tuples, ceiling)
    phi.flags.update(
        {
            "lder": r1["lder1"],
            "lder2": r1["lder2"],
            "l0": r2["l0"],
            "shuffle": r3["shuffle"],
        }
    )
    return {"lder": r1, "l0": r2, "shuffle": r3}


def require_valid(phi: Cochain):
    """Operations consuming cochains demand the gating flags verified."""
    for key in ("lder", "l0"):
        if phi.flags.get(key) == "failed":
            raise ValueError(f"cochain {phi.label} failed the {key} validator")


# ---------------------------------------------------------------------------
# compositions with E-maps (cochain level)


def compose_E_left(mm: int, phi: Cochain) -> Cochain:
    """E^{(m)}_W o_{m+1} Phi: the new inputs v_1..v_m are prepended as slots
    and variables; the composed map takes m + n free inputs."""
    n = phi.degree

    def entry_fn(all_states, ceiling):
        lead = tuple(all_states[:mm])
        rest = tuple(all_states[mm:])
        chain = left_ceiling_chain(
            lead, _tags_of(rest), phi.inert_tags, phi.anchor, ceiling
        )
        base = phi.entry(rest, chain[-1])
        return compose_left(lead, base, ceiling)

    return Cochain(
        mm + n,
        (phi.comp_m - mm) if isinstance(phi.comp_m, int) else phi.comp_m,
        phi.cutoff,
        entry_fn,
        phi.anchor,
        phi.inert_tags,
        f"E({mm})o[{phi.label}]",
    )


def compose_E_right(m: int, phi: Cochain) -> Cochain:
    """E^{W;(m)}_{WV} o_0 Phi: the transported insertions act after Phi's
    slots; variables (z_{n+1}..z_{n+m}) follow Phi's (z_1..z_n)."""
    n = phi.degree

    def entry_fn(all_states, ceiling):
        first = tuple(all_states[:n])
        tail = tuple(all_states[n:])
        chain = left_ceiling_chain(
            tail, _tags_of(first), phi.inert_tags, phi.anchor, ceiling
        )
        base = phi.entry(first, chain[-1])
        sec = compose_left(tail, base, ceiling)
        # compose_left put the tail variables first; move them after Phi's
        images = list(range(n, n + m)) + list(range(0, n))
        return sec.permute_active(Permutation(images))

    return Cochain(
        n + m,
        (phi.comp_m - m) if isinstance(phi.comp_m, int) else phi.comp_m,
        phi.cutoff,
        entry_fn,
        phi.anchor,
        phi.inert_tags,
        f"EW({m})o0[{phi.label}]",
    )
