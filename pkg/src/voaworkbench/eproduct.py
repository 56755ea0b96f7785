"""The epsilon-product of cochains over graded dual bases.

[Phi .eps Psi]_l (v)(z; zeta~_1, zeta~_2) pairs both factors against the
same w', sums u over a basis of the weight-l subspace against its dual, and
grades by eps^l. The sewing parameters enter through the intertwiner
Y^W_{WV}(F, zeta) u = e^{zeta L(-1)} Y_W(u, -zeta) F; the ring variables are
zeta~_a = -zeta_a so every pole stays inside the allowed locus.
"""

from __future__ import annotations

import random
from fractions import Fraction as Q

from .cochains import Cochain, enumerate_tuples, require_valid, _tags_of
from .correlators import MARGIN, apply_vertex, required_subceiling
from .differential import delta
from .heisenberg import (
    FockState,
    ModuleVector,
    bilinear_form,
    dual_basis,
    states_of_weight,
    states_up_to,
    virasoro,
)
from .ratfield import MultiPoly, RatFunc
from .sections import RationalSection

__all__ = [
    "ExclusionList",
    "EpsSeries",
    "eps_product",
    "commutator",
    "check_leibniz",
    "check_basis_independence",
    "sigma_act_product",
]


class ExclusionList:
    """Pairs (i, j), 1-based: first factor's variable x_i is identified with
    the second factor's y_j; the coinciding-pair monomials are excluded.
    t is the declared count of shared composable vertex operators."""

    def __init__(self, pairs=(), t: int = 0):
        pairs = [tuple(p) for p in pairs]
        if len({i for i, _ in pairs}) != len(pairs) or len(
            {j for _, j in pairs}
        ) != len(pairs):
            raise ValueError("pairs must be disjoint per coordinate")
        self.pairs = pairs
        self.r = len(pairs)
        self.t = t
        if self.t < 0:
            raise ValueError("t must be non-negative")


class EpsSeries:
    """Truncated formal power series in eps with per-weight coefficients.

    coefficient(l) is a Cochain of degree k + n - r whose ring carries two
    extra inert variables (zeta~_1, zeta~_2) after the factors' own inerts.
    """

    def __init__(self, order: int, coeffs: dict, slot: tuple, zeta_policy="independent"):
        self.order = order
        self.coeffs = coeffs
        self.slot = slot
        self.zeta_policy = zeta_policy

    def coefficient(self, l: int) -> Cochain:
        return self.coeffs[l]

    @property
    def degree(self) -> int:
        return self.slot[0]

    def map_coeffs(self, fn, slot=None) -> "EpsSeries":
        return EpsSeries(
            self.order,
            {l: fn(c, l) for l, c in self.coeffs.items()},
            slot or self.slot,
            self.zeta_policy,
        )

    def add(self, other: "EpsSeries") -> "EpsSeries":
        if self.order != other.order or self.degree != other.degree:
            raise ValueError("series shape mismatch")
        from .cochains import linear_combination

        out = {}
        for l in self.coeffs:
            a, b = self.coeffs[l], other.coeffs[l]

            def entry_fn(states, ceiling, a=a, b=b):
                return a.entry(states, ceiling) + b.entry(states, ceiling)

            out[l] = Cochain(
                a.degree, a.comp_m, min(a.cutoff, b.cutoff), entry_fn,
                max(a.anchor, b.anchor), a.inert_tags, f"sum[{a.label}]",
                dict(a.flags), a.w_mult,
            )
        return EpsSeries(self.order, out, self.slot, self.zeta_policy)

    def scale(self, c) -> "EpsSeries":
        c = Q(c)

        def fn(coeff, l):
            def entry_fn(states, ceiling):
                return coeff.entry(states, ceiling).scale(c)

            return Cochain(
                coeff.degree, coeff.comp_m, coeff.cutoff, entry_fn, coeff.anchor,
                coeff.inert_tags, coeff.label, dict(coeff.flags), coeff.w_mult,
            )

        return self.map_coeffs(fn)

    def sub(self, other: "EpsSeries") -> "EpsSeries":
        return self.add(other.scale(-1))

    def is_zero_on(self, tuples, ceiling: int) -> bool:
        return all(
            self.coeffs[l].entry(t, ceiling).is_zero()
            for l in self.coeffs
            for t in tuples
        )

    def to_obj(self, tuples, ceiling: int) -> dict:
        names = None
        out = {"order": self.order, "zeta_policy": self.zeta_policy,
               "slot": list(self.slot), "coefficients": {}}
        for l, c in self.coeffs.items():
            deg = c.degree
            names = [f"z{k+1}" for k in range(deg)] + [
                f"aux{k+1}" for k in range(len(c.inert_tags) - 2)
            ] + ["zeta1", "zeta2"]
            table = {}
            for t in tuples:
                sec = c.entry(t, ceiling)
                key = ";".join(s.to_text() for s in t) if t else "()"
                table[key] = {
                    s.to_text(): f.to_obj(names) for s, f in sorted(sec.pairings.items())
                }
            out["coefficients"][str(l)] = table
        return out


def _transport_pairing(sec: RationalSection, wstate: FockState, zeta_var: int) -> RatFunc:
    """<e^{zeta~ L(1)} w~, lift(sec)> as a RatFunc: the e^{zeta L(-1)} factor
    of the intertwiner moved onto the dual vector (L(-1)^+ = -L(1))."""
    out = RatFunc.zero(sec.nv)
    cur = ModuleVector.basis(wstate)
    j = 0
    fact = Q(1)
    while not cur.is_zero():
        if j:
            fact = fact / j
        val = sec.pair_vector(cur)
        if not val.is_zero():
            mono = RatFunc(
                MultiPoly(
                    sec.nv, {tuple(j if k == zeta_var else 0 for k in range(sec.nv)): fact}
                )
            )
            out = out + val * mono
        cur = virasoro(1, cur)
        j += 1
    return out


def _factor_value(
    cochain: Cochain,
    states: tuple,
    u: ModuleVector,
    wstate: FockState,
    ceiling_w: int,
    margin: int = MARGIN,
    insert: FockState | None = None,
) -> RatFunc:
    """<w~, Y^W_{WV}(Phi(states), zeta) u> over the factor's own ring plus
    one new zeta~ variable appended after the active slots.

    With ``insert`` the factor value carries one extra vertex operator,
    <w~, Y^W_{WV}(Y_W(insert, z_new) Phi(states), zeta) u>, the new variable
    first in the factor ring."""
    cache = getattr(cochain, "_fv_cache", None)
    if cache is None:
        cache = cochain._fv_cache = {}
    key = (tuple(states), u, wstate, ceiling_w, margin, insert)
    hit = cache.get(key)
    if hit is not None:
        return hit
    tags = _tags_of(states)
    nact = len(states) + (1 if insert is not None else 0)
    out = None
    for us, uc in u.items():
        sub = required_subceiling(
            us,
            ((insert.weight,) if insert is not None else ()) + tags,
            cochain.inert_tags,
            cochain.anchor,
            ceiling_w,
            margin,
        )
        if insert is not None:
            sub_in = required_subceiling(
                insert, tags, cochain.inert_tags, cochain.anchor, sub, margin
            )
            base = cochain.entry(states, sub_in)
            base = apply_vertex(insert, base, sub, pos=0, margin=margin)
        else:
            base = cochain.entry(states, sub)
        applied = apply_vertex(us, base, ceiling_w, pos=nact, margin=margin)
        val = _transport_pairing(applied, wstate, nact)
        term = val.scale(uc)
        out = term if out is None else out + term
    out = out if out is not None else RatFunc.zero(cochain.nv + 1 + (1 if insert else 0))
    cache[key] = out
    return out


def eps_product(
    first: Cochain,
    second: Cochain,
    excl: ExclusionList | None = None,
    order: int = 3,
    pin_first: dict | None = None,
    pin_second: dict | None = None,
    ceiling_cap: int | None = None,
    dual_maps: dict | None = None,
    margin: int = MARGIN,
    zeta_policy: str = "independent",
) -> EpsSeries:
    """The eps-product as an EpsSeries of lazy coefficient cochains.

    excl identifies first's x_i with second's y_j (1-based pairs); for each
    pair exactly one side's input is absorbed: pin_second[j] / pin_first[i]
    fix it to a module vector, otherwise the second factor's slot mirrors the
    first factor's free input. dual_maps optionally replaces the weight-l
    dual-basis pair by an exactly transformed one (basis-independence checks).
    """
    require_valid(first)
    require_valid(second)
    excl = excl or ExclusionList()
    pin_first = dict(pin_first or {})
    pin_second = dict(pin_second or {})
    k = first.degree
    n = second.degree
    r = excl.r
    pair_of_first = {i: j for i, j in excl.pairs}
    pair_of_second = {j: i for i, j in excl.pairs}
    for i in pin_first:
        if i not in pair_of_first:
            raise ValueError("pin_first only on paired slots")
        if pair_of_first[i] in pin_second:
            raise ValueError("a pair cannot be pinned on both sides")
    for j in pin_second:
        if j not in pair_of_second:
            raise ValueError("pin_second only on paired slots")

    # ambient layout: first's k vars, second's unpaired vars, first inerts,
    # second inerts, zeta~_1, zeta~_2
    second_unpaired = [j for j in range(1, n + 1) if j not in pair_of_second]
    amb_active = k + len(second_unpaired)
    var_of_second = {}
    for posn, j in enumerate(second_unpaired):
        var_of_second[j] = k + posn
    for j, i in pair_of_second.items():
        var_of_second[j] = i - 1
    f1_inert_base = amb_active
    f2_inert_base = f1_inert_base + len(first.inert_tags)
    zeta1 = f2_inert_base + len(second.inert_tags)
    zeta2 = zeta1 + 1
    nv_amb = zeta2 + 1

    # free input order: first's unpinned slots, then second's free slots
    first_free = [i for i in range(1, k + 1) if i not in pin_first]
    second_free = [
        j
        for j in range(1, n + 1)
        if (j not in pair_of_second) or (pair_of_second[j] in pin_first)
    ]
    degree_out = len(first_free) + len(second_free)
    if degree_out != amb_active:
        raise ValueError("pin bookkeeping mismatch")

    mlabel = f"{first.label}.eps.{second.label}"
    slot = (k + n - r, _slot_m(first.comp_m, second.comp_m, excl.t))
    anchor = first.anchor + second.anchor
    cutoff = min(first.cutoff, second.cutoff)
    structural_zero = getattr(first, "structural_zero", False) or getattr(
        second, "structural_zero", False
    )

    def coeff_cochain(l: int) -> Cochain:
        basis, duals = dual_basis(l)
        if dual_maps and l in dual_maps:
            basis, duals = dual_maps[l]

        def entry_fn(states, ceiling):
            states = tuple(states)
            if structural_zero:
                tags0 = [0] * amb_active
                it = (
                    tuple(first.inert_tags) + tuple(second.inert_tags) + (l, l)
                )
                return RationalSection.zero(
                    nv_amb, amb_active, ceiling,
                    tuple(tags0 if len(states) != amb_active else
                          [s.weight for s in states]),
                    it, anchor,
                )
            # assemble both factors' full input lists
            inputs1: dict[int, ModuleVector] = {}
            inputs2: dict[int, ModuleVector] = {}
            idx = 0
            for i in first_free:
                inputs1[i] = ModuleVector.basis(states[idx])
                idx += 1
            for j in second_free:
                inputs2[j] = ModuleVector.basis(states[idx])
                idx += 1
            for i, val in pin_first.items():
                inputs1[i] = val
            for j, val in pin_second.items():
                inputs2[j] = val
            for j, i in pair_of_second.items():
                if j not in inputs2:
                    inputs2[j] = inputs1[i]  # mirrored input at a shared point
            tups1 = _expand_inputs(inputs1, k)
            tups2 = _expand_inputs(inputs2, n)

            # after apply_vertex at pos=len(states) the factor ring reads
            # [actives][zeta~][factor inerts]
            emb1 = {kk: kk for kk in range(k)}
            emb1[k] = zeta1
            for c in range(len(first.inert_tags)):
                emb1[k + 1 + c] = f1_inert_base + c
            emb2 = {}
            for j in range(1, n + 1):
                emb2[j - 1] = var_of_second[j]
            emb2[n] = zeta2
            for c in range(len(second.inert_tags)):
                emb2[n + 1 + c] = f2_inert_base + c

            pair_out: dict[FockState, RatFunc] = {}
            for lp in range(0, ceiling + 1):
                for wstate in states_of_weight(lp):
                    total = None
                    for u_vec, ubar_vec in zip(basis, duals):
                        f1 = None
                        for c1, t1 in tups1:
                            v = _factor_value(first, t1, u_vec, wstate, lp, margin)
                            v = v.scale(c1)
                            f1 = v if f1 is None else f1 + v
                        if f1 is None or f1.is_zero():
                            continue
                        f2 = None
                        for c2, t2 in tups2:
                            v = _factor_value(second, t2, ubar_vec, wstate, lp, margin)
                            v = v.scale(c2)
                            f2 = v if f2 is None else f2 + v
                        if f2 is None or f2.is_zero():
                            continue
                        term = f1.embed(nv_amb, emb1) * f2.embed(nv_amb, emb2)
                        total = term if total is None else total + term
                    if total is not None and not total.is_zero():
                        pair_out[wstate] = total
            tags = [0] * amb_active
            for i in range(1, k + 1):
                tags[i - 1] += (
                    inputs1[i].max_weight() if i in inputs1 else 0
                )
            for j in range(1, n + 1):
                tags[var_of_second[j]] += inputs2[j].max_weight()
            return RationalSection(
                nv_amb,
                amb_active,
                ceiling,
                tuple(tags),
                pair_out,
                tuple(first.inert_tags)
                + tuple(second.inert_tags)
                + (l, l),
                anchor,
            )

        def entry_with_insertion(side, vnew, states, ceiling, newpos):
            """Y_W(v_new, z_new) inserted into one factor's intertwiner
            transport (the product's outer coboundary terms act inside the
            factor carrying that edge). The new variable is embedded at
            ambient active position ``newpos`` and all actives shift."""
            states = tuple(states)
            inputs1: dict[int, ModuleVector] = {}
            inputs2: dict[int, ModuleVector] = {}
            idx = 0
            for i in first_free:
                inputs1[i] = ModuleVector.basis(states[idx])
                idx += 1
            for j in second_free:
                inputs2[j] = ModuleVector.basis(states[idx])
                idx += 1
            for i, val in pin_first.items():
                inputs1[i] = val
            for j, val in pin_second.items():
                inputs2[j] = val
            for j, i in pair_of_second.items():
                if j not in inputs2:
                    inputs2[j] = inputs1[i]
            tups1 = _expand_inputs(inputs1, k)
            tups2 = _expand_inputs(inputs2, n)

            nv2 = nv_amb + 1
            shift = lambda v: v if v < newpos else v + 1
            emb1 = {kk: shift(kk) for kk in range(k)}
            emb1[k] = shift(zeta1)
            for c in range(len(first.inert_tags)):
                emb1[k + 1 + c] = shift(f1_inert_base + c)
            emb2 = {}
            for j in range(1, n + 1):
                emb2[j - 1] = shift(var_of_second[j])
            emb2[n] = shift(zeta2)
            for c in range(len(second.inert_tags)):
                emb2[n + 1 + c] = shift(f2_inert_base + c)
            # inside the inserted factor the new variable comes first
            if side == 1:
                emb1 = {kk + 1: t for kk, t in emb1.items()}
                emb1[0] = newpos
            else:
                emb2 = {kk + 1: t for kk, t in emb2.items()}
                emb2[0] = newpos

            pair_out: dict[FockState, RatFunc] = {}
            for lp in range(0, ceiling + 1):
                for wstate in states_of_weight(lp):
                    total = None
                    for u_vec, ubar_vec in zip(basis, duals):
                        f1 = None
                        for c1, t1 in tups1:
                            v = _factor_value(
                                first, t1, u_vec, wstate, lp, margin,
                                insert=vnew if side == 1 else None,
                            )
                            v = v.scale(c1)
                            f1 = v if f1 is None else f1 + v
                        if f1 is None or f1.is_zero():
                            continue
                        f2 = None
                        for c2, t2 in tups2:
                            v = _factor_value(
                                second, t2, ubar_vec, wstate, lp, margin,
                                insert=vnew if side == 2 else None,
                            )
                            v = v.scale(c2)
                            f2 = v if f2 is None else f2 + v
                        if f2 is None or f2.is_zero():
                            continue
                        term = f1.embed(nv2, emb1) * f2.embed(nv2, emb2)
                        total = term if total is None else total + term
                    if total is not None and not total.is_zero():
                        pair_out[wstate] = total
            tags = [0] * amb_active
            for i in range(1, k + 1):
                tags[i - 1] += inputs1[i].max_weight()
            for j in range(1, n + 1):
                tags[var_of_second[j]] += inputs2[j].max_weight()
            tags.insert(newpos, vnew.weight)
            return RationalSection(
                nv2,
                amb_active + 1,
                ceiling,
                tuple(tags),
                pair_out,
                tuple(first.inert_tags)
                + tuple(second.inert_tags)
                + (l, l),
                anchor,
            )

        flags = {
            "lder": "verified"
            if first.flags.get("lder") == second.flags.get("lder") == "verified"
            else "unchecked",
            "l0": "verified"
            if first.flags.get("l0") == second.flags.get("l0") == "verified"
            else "unchecked",
        }
        out = Cochain(
            degree_out,
            slot[1],
            cutoff,
            entry_fn,
            anchor,
            tuple(first.inert_tags) + tuple(second.inert_tags) + (l, l),
            f"{mlabel}@eps^{l}",
            flags,
            first.w_mult + second.w_mult,
        )
        if structural_zero:
            out.structural_zero = True
        else:
            out.entry_with_insertion = entry_with_insertion
        return out

    coeffs = {l: coeff_cochain(l) for l in range(order + 1)}
    return EpsSeries(order, coeffs, slot, zeta_policy)


def _slot_m(m1, m2, t):
    if isinstance(m1, int) and isinstance(m2, int):
        return m1 + m2 - t
    return m1


def _expand_inputs(inputs: dict, count: int) -> list:
    """Multilinear expansion of slot -> ModuleVector into basis tuples."""
    out = [(Q(1), ())]
    for slot in range(1, count + 1):
        vec = inputs[slot]
        nxt = []
        for c, tup in out:
            for s, cs in vec.items():
                nxt.append((c * cs, tup + (s,)))
        out = nxt
    return out


def commutator(
    first: Cochain,
    second: Cochain,
    excl: ExclusionList | None = None,
    order: int = 3,
    pin_first: dict | None = None,
    pin_second: dict | None = None,
    margin: int = MARGIN,
) -> EpsSeries:
    """[Phi, Psi] = Phi .eps Psi - Psi .eps Phi on the shared tuple space."""
    excl = excl or ExclusionList()
    fwd = eps_product(first, second, excl, order, pin_first, pin_second, margin=margin)
    swapped = ExclusionList([(j, i) for i, j in excl.pairs], excl.t)
    bwd = eps_product(
        second,
        first,
        swapped,
        order,
        pin_first=pin_second,
        pin_second=pin_first,
        margin=margin,
    )
    return fwd.sub(bwd)


def sigma_act_product(sigma, series: EpsSeries) -> EpsSeries:
    """The S_{k+n-r} action on a product, coefficient-wise."""
    from .cochains import sigma_act

    return series.map_coeffs(lambda c, l: sigma_act(sigma, c))


def check_leibniz(
    first: Cochain,
    second: Cochain,
    excl: ExclusionList | None = None,
    order: int = 2,
    tuples=None,
    ceiling: int = 1,
    margin: int = MARGIN,
) -> dict:
    """delta(Phi .eps Psi) = (delta Phi) .eps Psi + (-1)^k Phi .eps (delta Psi),
    checked exactly per eps coefficient on the tuple domain."""
    excl = excl or ExclusionList()
    k = first.degree
    prod = eps_product(first, second, excl, order, margin=margin)
    dphi = delta(first, margin)
    dphi.flags.update({"lder": "verified", "l0": "verified"})
    lhs = prod.map_coeffs(lambda c, l: delta(c, margin))
    excl_dphi = ExclusionList([(i + 1, j) for i, j in excl.pairs], excl.t)
    rhs1 = eps_product(dphi, second, excl_dphi, order, margin=margin)
    dpsi = delta(second, margin)
    dpsi.flags.update({"lder": "verified", "l0": "verified"})
    excl_dpsi = ExclusionList([(i, j + 1) for i, j in excl.pairs], excl.t)
    rhs_extra = eps_product(first, dpsi, excl_dpsi, order, margin=margin)
    rhs = rhs1.add(rhs_extra.scale(Q((-1) ** k)))
    if tuples is None:
        tuples = enumerate_tuples(lhs.coeffs[0].degree, 1, 1)
    failures = []
    for l in range(order + 1):
        for t in tuples:
            a = lhs.coeffs[l].entry(t, ceiling)
            b = rhs.coeffs[l].entry(t, ceiling)
            if not (a - b).is_zero():
                failures.append(
                    {
                        "l": l,
                        "tuple": [s.to_text() for s in t],
                        "lhs": {s.to_text(): f.to_obj() for s, f in a.pairings.items()},
                        "rhs": {s.to_text(): f.to_obj() for s, f in b.pairings.items()},
                    }
                )
    return {
        "slots": [[first.degree, first.comp_m], [second.degree, second.comp_m]],
        "r": excl.r,
        "t": excl.t,
        "order": order,
        "tuples_checked": len(tuples),
        "ok": not failures,
        "first_failure": failures[0] if failures else None,
    }


def check_basis_independence(
    first: Cochain,
    second: Cochain,
    excl: ExclusionList | None = None,
    order: int = 3,
    tuples=None,
    ceiling: int = 1,
    seed: int = 1,
    margin: int = MARGIN,
) -> dict:
    """Recompute the product after an exact invertible change of basis of
    each V_l (duals transformed contragrediently); series must be identical."""
    rng = random.Random(seed)
    excl = excl or ExclusionList()
    base = eps_product(first, second, excl, order, margin=margin)
    dual_maps = {}
    for l in range(order + 1):
        basis, duals = dual_basis(l)
        mdim = len(basis)
        # random unitriangular integer matrix with a shuffled diagonal scale
        mat = [[Q(0)] * mdim for _ in range(mdim)]
        for a in range(mdim):
            mat[a][a] = Q(rng.choice([1, 2, -1]))
            for b in range(a + 1, mdim):
                mat[a][b] = Q(rng.randint(-2, 2))
        new_basis = []
        for a in range(mdim):
            vec = ModuleVector.zero()
            for b in range(mdim):
                if mat[a][b]:
                    vec = vec + basis[b].scale(mat[a][b])
            new_basis.append(vec)
        # contragredient duals: solve <new_basis[a], new_dual[b]> = delta_ab
        gram = [
            [bilinear_form(new_basis[a], duals[b]) for b in range(mdim)]
            for a in range(mdim)
        ]
        inv = _invert(gram)
        new_duals = []
        for b in range(mdim):
            vec = ModuleVector.zero()
            for c in range(mdim):
                if inv[c][b]:
                    vec = vec + duals[c].scale(inv[c][b])
            new_duals.append(vec)
        dual_maps[l] = (new_basis, new_duals)
    alt = eps_product(first, second, excl, order, dual_maps=dual_maps, margin=margin)
    if tuples is None:
        tuples = enumerate_tuples(base.coeffs[0].degree, 1, 1)
    failures = []
    for l in range(order + 1):
        for t in tuples:
            a = base.coeffs[l].entry(t, ceiling)
            b = alt.coeffs[l].entry(t, ceiling)
            if not (a - b).is_zero():
                failures.append({"l": l, "tuple": [s.to_text() for s in t]})
    return {"ok": not failures, "failures": failures[:3], "order": order}


def _invert(mat):
    m = len(mat)
    aug = [list(row) + [Q(1) if i == j else Q(0) for j in range(m)] for i, row in enumerate(mat)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col]), None)
        if piv is None:
            raise ValueError("singular transform")
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[m:] for row in aug]
