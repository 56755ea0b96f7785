"""Exact correlator engines.

The primary engine expands vertex-operator modes against a section's stored
pairings in the region |z_new| > |others| and reconstructs the rational
function from the truncated window (intermediate weights above the section
ceiling are the unknown tail; stabilization is certified by the univariate
reconstructor). The Wick pair-partition oracle is an independent check for
pure-generator correlators between vacua.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction as Q

from .heisenberg import (
    CutoffExceeded,
    FockState,
    ModuleVector,
    VACUUM,
    bilinear_form,
    gram_norm,
    states_of_weight,
    states_up_to,
    vertex_mode_state,
    virasoro,
)
from .ratfield import (
    InsufficientDepth,
    MultiPoly,
    Permutation,
    RatFunc,
    reconstruct_univariate,
)
from .sections import RationalSection

__all__ = [
    "MARGIN",
    "apply_vertex",
    "e_section",
    "required_subceiling",
    "matrix_element",
    "wick_pure_a",
    "intertwiner",
    "compose_left",
    "clear_caches",
]

MARGIN = 2


def _axis_bound(v_wt: int, anchor: int) -> int:
    # a vacuum insertion is the identity; no pole over a vacuum anchor either
    return 0 if anchor == 0 or v_wt == 0 else v_wt + anchor


def _diff_bound(w1: int, w2: int) -> int:
    # vacuum insertions produce no OPE singularities
    return 0 if w1 == 0 or w2 == 0 else w1 + w2


def _incidence_bounds(v_wt: int, section: RationalSection) -> tuple:
    """(axis order, per-variable difference orders) for a new v-insertion."""
    alpha = _axis_bound(v_wt, section.anchor)
    betas = {}
    for j, t in enumerate(section.tags):
        betas[j] = _diff_bound(v_wt, t)
    for c, t in enumerate(section.inert_tags):
        betas[section.active + c] = _diff_bound(v_wt, t)
    return alpha, betas


def apply_vertex(
    v: FockState,
    section: RationalSection,
    out_ceiling: int,
    pos: int = 0,
    margin: int = MARGIN,
) -> RationalSection:
    """Section of Y_W(v, z_new) applied to the (lifted) section value.

    The new variable is inserted at active position ``pos``; the result's
    pairings are exact for output weights <= out_ceiling, provided the input
    section is deep enough (InsufficientDepth otherwise).
    """
    alpha, betas = _incidence_bounds(v.weight, section)
    H = alpha + sum(betas.values())
    nv_new = section.nv + 1
    varmap = {k: (k if k < pos else k + 1) for k in range(section.nv)}
    shifted_betas = {varmap[j]: b for j, b in betas.items()}

    # component transfer matrix: for output state t and window exponent e,
    # c_e = sum_s <t, v(-e-1)s> / <s,s> * pairing[s]; the window only needs
    # margin-many negative checks past the denominator degree
    by_weight: dict[int, list] = {}
    for s, p in section.pairings.items():
        by_weight.setdefault(s.weight, []).append((s, p))
    v_parity = len(v.parts) % 2
    pair_out: dict[FockState, RatFunc] = {}
    for lprime in range(0, out_ceiling + 1):
        need = lprime - v.weight + H + margin
        if section.ceiling < need:
            raise InsufficientDepth(
                f"section ceiling {section.ceiling} < required {need} for "
                f"output weight {lprime} (v weight {v.weight}, H {H})"
            )
        lo = -(H + margin)
        hi = lprime - v.weight
        if hi < lo:
            lo = hi
        for t in states_of_weight(lprime):
            t_parity = len(t.parts) % 2
            coeffs: dict[int, RatFunc] = {}
            for e in range(lo, hi + 1):
                sw = lprime - v.weight - e
                if sw < 0:
                    continue
                acc = None
                for s, p in by_weight.get(sw, ()):
                    if (len(s.parts) + v_parity) % 2 != t_parity:
                        continue
                    amp = bilinear_form(
                        ModuleVector.basis(t), vertex_mode_state(v, -e - 1, s)
                    ) / gram_norm(s)
                    if amp:
                        term = p.scale(amp)
                        acc = term if acc is None else acc + term
                if acc is not None and not acc.is_zero():
                    coeffs[e] = acc.embed(nv_new, varmap)
            f = reconstruct_univariate(
                coeffs,
                nv_new,
                pos,
                lo,
                hi,
                axis_order=alpha,
                diff_orders=shifted_betas,
                center=None,
                margin=margin,
                verify=True,
            )
            if not f.is_zero():
                pair_out[t] = f
    tags = list(section.tags)
    tags.insert(pos, v.weight)
    return RationalSection(
        nv_new,
        section.active + 1,
        out_ceiling,
        tuple(tags),
        pair_out,
        section.inert_tags,
        section.anchor,
    )


def required_subceiling(
    v: FockState, rest_tags: tuple, inert_tags: tuple, anchor: int, out_ceiling: int,
    margin: int = MARGIN,
) -> int:
    alpha = _axis_bound(v.weight, anchor)
    H = alpha + sum(v.weight + t for t in rest_tags) + sum(
        v.weight + t for t in inert_tags
    )
    return max(0, out_ceiling - v.weight + H + margin)


_E_CACHE: dict = {}


def clear_caches():
    _E_CACHE.clear()


def e_section(
    insertions: tuple,
    w: ModuleVector,
    ceiling: int,
    margin: int = MARGIN,
) -> RationalSection:
    """E^{(n)}_W(v_1..v_n; w) as a section over (z_1..z_n), built by applying
    vertex operators outermost-last with per-step reconstruction."""
    insertions = tuple(insertions)
    key = (insertions, w, ceiling)
    hit = _E_CACHE.get(key)
    if hit is not None:
        return hit
    # reuse a deeper cached build when present
    for (ins2, w2, c2), sec in list(_E_CACHE.items()):
        if ins2 == insertions and w2 == w and c2 >= ceiling:
            out = sec.slice_ceiling(ceiling)
            _E_CACHE[key] = out
            return out
    if not insertions:
        out = RationalSection.constant(w, ceiling)
    else:
        v = insertions[0]
        rest = insertions[1:]
        anchor = 0 if w == ModuleVector.basis(VACUUM) else w.max_weight()
        sub_ceiling = required_subceiling(
            v, tuple(s.weight for s in rest), (), anchor, ceiling, margin
        )
        sub = e_section(rest, w, sub_ceiling, margin)
        out = apply_vertex(v, sub, ceiling, pos=0, margin=margin)
    _E_CACHE[key] = out
    return out


def matrix_element(
    wprime: ModuleVector,
    insertions: tuple,
    w: ModuleVector,
    check_region: bool = False,
    margin: int = MARGIN,
) -> RatFunc:
    """R(<w', Y(v_1,z_1)...Y(v_n,z_n) w>) as an exact RatFunc.

    With check_region=True the function is rebuilt with the reversed
    insertion order (a different expansion region) and compared exactly.
    """
    ceiling = max((s.weight for s in wprime.comps), default=0)
    sec = e_section(tuple(insertions), w, ceiling, margin)
    val = sec.pair_vector(wprime)
    if check_region:
        n = len(insertions)
        rev = e_section(tuple(reversed(insertions)), w, ceiling, margin)
        perm = Permutation([n - 1 - k for k in range(n)])
        alt = rev.pair_vector(wprime).permute(perm)
        if alt != val:
            raise AssertionError("region-independence violation in matrix_element")
    return val


def wick_pure_a(n: int) -> RatFunc:
    """<1, Y(a,z_1)...Y(a,z_n) 1> by the pair-partition oracle."""
    if n % 2:
        return RatFunc.zero(n)
    out = RatFunc.zero(n)
    for matching in _perfect_matchings(list(range(n))):
        term = RatFunc.const(n, 1)
        for i, j in matching:
            term = term * RatFunc.diff_inv(n, i, j, 2)
        out = out + term
    return out


def _perfect_matchings(items: list):
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        pair = (first, items[k])
        rest = items[1:k] + items[k + 1 :]
        for sub in _perfect_matchings(rest):
            yield [pair] + sub


def intertwiner(w: ModuleVector, v: ModuleVector, ceiling: int) -> RationalSection:
    """Y^W_{WV}(w, z)v = e^{z L(-1)} Y_W(v, -z) w as a one-variable section.

    Exact Laurent polynomial in z per pairing; no reconstruction needed."""
    pair: dict[FockState, RatFunc] = {}
    for lprime in range(0, ceiling + 1):
        for t in states_of_weight(lprime):
            terms: dict[tuple, Q] = {}
            tv = ModuleVector.basis(t)
            j = 0
            cur = tv
            while not cur.is_zero():
                # <t, L(-1)^j X> = (-1)^j <L(1)^j t, X>
                for sv, cv in v.comps.items():
                    for sw, cw in w.comps.items():
                        m = sv.weight + sw.weight - (lprime - j) - 1
                        amp = bilinear_form(cur, vertex_mode_state(sv, m, sw))
                        if amp:
                            # cur already carries (-1)^j from the transport
                            sgn = -1 if (m + 1) % 2 else 1
                            coeff = cv * cw * amp * Q(sgn, math.factorial(j))
                            k = j - m - 1
                            terms[(k,)] = terms.get((k,), Q(0)) + coeff
                cur = virasoro(1, cur).scale(-1)
                j += 1
            poly_terms = {e: c for e, c in terms.items() if c and e[0] >= 0}
            neg = {e: c for e, c in terms.items() if c and e[0] < 0}
            f = RatFunc(MultiPoly(1, poly_terms))
            for (k,), c in neg.items():
                f = f + RatFunc.monomial_inv(1, 0, -k).scale(c)
            if not f.is_zero():
                pair[t] = f
    anchor = 0 if w == ModuleVector.basis(VACUUM) else w.max_weight()
    vtag = max((s.weight for s in v.comps), default=0)
    return RationalSection(1, 1, ceiling, (vtag,), pair, (), anchor)


def left_ceiling_chain(
    states: tuple, section_tags: tuple, inert_tags: tuple, anchor: int,
    out_ceiling: int, margin: int = MARGIN,
) -> list:
    """ceilings[i] = ceiling of the intermediate section once states[i:] have
    been applied; ceilings[len(states)] is what the input section needs."""
    ceilings = [out_ceiling]
    for idx in range(len(states)):
        rest_tags = tuple(s.weight for s in states[idx + 1 :]) + tuple(section_tags)
        ceilings.append(
            required_subceiling(
                states[idx], rest_tags, inert_tags, anchor, ceilings[-1], margin
            )
        )
    return ceilings


def compose_left(
    states: tuple,
    section: RationalSection,
    out_ceiling: int,
    margin: int = MARGIN,
) -> RationalSection:
    """E^{(m)}_W composed on the left: Y(v_1,z_1)...Y(v_m,z_m) applied to the
    section value, new variables prepended (innermost applied first)."""
    states = tuple(states)
    ceilings = left_ceiling_chain(
        states, section.tags, section.inert_tags, section.anchor, out_ceiling, margin
    )
    cur = section
    for idx in range(len(states) - 1, -1, -1):
        cur = apply_vertex(states[idx], cur, ceilings[idx], pos=0, margin=margin)
    return cur
