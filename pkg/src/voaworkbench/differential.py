"""Coboundary operators and truncated cohomology ranks.

delta is the literal three-part alternating sum: the leading Y_W(v_1, z_1)
application, the middle Y_V(v_i, z_i - z_{i+1}) insertions (difference-mode
window reconstructions against the lazily extended table), and the
sigma-twisted trailing application. Nothing is simplified through
associativity: cancellations in delta(delta(Phi)) are computed outcomes.
"""

from __future__ import annotations

import time
from fractions import Fraction as Q

from .cochains import Cochain, enumerate_tuples, require_valid, _tags_of
from .correlators import MARGIN, apply_vertex, required_subceiling
from .heisenberg import (
    FockState,
    ModuleVector,
    states_of_weight,
    states_up_to,
    vertex_mode_state,
)
from .ratfield import Permutation, RatFunc, reconstruct_univariate
from .sections import RationalSection

__all__ = [
    "delta",
    "delta_half",
    "middle_term",
    "check_complex",
    "truncated_cohomology",
    "bareiss_rank",
]


from .correlators import _axis_bound, _diff_bound


def _full_denominator_budget(amb_wts, inert_tags, anchor) -> int:
    """Total degree of the weight-additive denominator ansatz over all
    variables (inert sewing slots included); with homogeneity this bounds
    every numerator degree."""
    allw = list(amb_wts) + list(inert_tags)
    total = sum(_axis_bound(w, anchor) for w in allw)
    for p in range(len(allw)):
        for q in range(p + 1, len(allw)):
            total += _diff_bound(allw[p], allw[q])
    return total


def middle_term(phi: Cochain, states: tuple, i: int, ceiling: int,
                margin: int = MARGIN) -> RationalSection:
    """Phi(v_1 .. Y_V(v_i, z_i - z_{i+1}) v_{i+1} .. v_{n+1}) at
    (z_1,..,^z_i,..,z_{n+1}), reconstructed in the difference direction.

    i is 1-based; the result is a section in n+1 active variables.
    """
    n = phi.degree
    states = tuple(states)
    amb_wts = _tags_of(states)
    n_amb = n + 1
    nv_amb = n_amb + len(phi.inert_tags)
    t_var = i - 1
    center = i
    wi = states[i - 1].weight
    wi1 = states[i].weight
    anchor = phi.anchor

    alpha = _axis_bound(wi, anchor)
    diff_orders = {}
    for j in range(n_amb):
        if j != t_var:
            diff_orders[j] = _diff_bound(wi, amb_wts[j])
    for c, tg in enumerate(phi.inert_tags):
        diff_orders[n_amb + c] = _diff_bound(wi, tg)

    # Phi's slot layout inside the ambient ring: the composite slot sits at
    # the center variable z_{i+1}; slots after it shift by one
    varmap = {}
    for k in range(n):
        if k < i - 1:
            varmap[k] = k
        elif k == i - 1:
            varmap[k] = center
        else:
            varmap[k] = k + 1
    for c in range(len(phi.inert_tags)):
        varmap[n + c] = n_amb + c

    budget = _full_denominator_budget(amb_wts, phi.inert_tags, anchor)
    lo = -(wi + wi1)
    pair_out: dict[FockState, RatFunc] = {}
    insert_cache: dict[int, list] = {}
    for lprime in range(0, ceiling + 1):
        deg_u = (
            phi.w_mult * lprime - anchor - sum(amb_wts) - sum(phi.inert_tags)
        ) + budget
        hi = deg_u + margin
        if hi < lo:
            hi = lo
        for t in states_of_weight(lprime):
            coeffs: dict[int, RatFunc] = {}
            for e in range(lo, hi + 1):
                if e not in insert_cache:
                    insert_cache[e] = list(
                        vertex_mode_state(states[i - 1], -e - 1, states[i]).items()
                    )
                acc = None
                for b_state, cb in insert_cache[e]:
                    tup2 = states[: i - 1] + (b_state,) + states[i + 1 :]
                    sec = phi.entry(tup2, lprime)
                    p = sec.pairings.get(t)
                    if p is None:
                        continue
                    term = p.scale(cb)
                    acc = term if acc is None else acc + term
                if acc is not None and not acc.is_zero():
                    coeffs[e] = acc.embed(nv_amb, varmap)
            f = reconstruct_univariate(
                coeffs,
                nv_amb,
                t_var,
                lo,
                hi,
                axis_order=alpha,
                diff_orders=diff_orders,
                center=center,
                deg_bound=deg_u,
                margin=margin,
                verify=True,
            )
            if not f.is_zero():
                pair_out[t] = f
    return RationalSection(
        nv_amb, n_amb, ceiling, amb_wts, pair_out, phi.inert_tags, anchor
    )


def _leading_term(phi: Cochain, states: tuple, ceiling: int,
                  margin: int = MARGIN) -> RationalSection:
    """Y_W(v_1, z_1) applied to Phi(v_2..v_{n+1}) (z_2..z_{n+1}).

    On eps-product coefficients the insertion acts inside the first factor's
    intertwiner transport (the sewn-sphere edge carrying z_1); applying it to
    the double-pairing lift is a different object and breaks the product's
    charge grading."""
    ins = getattr(phi, "entry_with_insertion", None)
    if ins is not None:
        return ins(1, states[0], states[1:], ceiling, 0)
    rest = states[1:]
    sub = required_subceiling(
        states[0], _tags_of(rest), phi.inert_tags, phi.anchor, ceiling, margin
    )
    base = phi.entry(rest, sub)
    return apply_vertex(states[0], base, ceiling, pos=0, margin=margin)


def _trailing_term(phi: Cochain, states: tuple, ceiling: int,
                   margin: int = MARGIN) -> RationalSection:
    """sigma_{n+1,1..n}(E o_2 Phi): Y_W(v_{n+1}, z_{n+1}) Phi(v_1..v_n)."""
    n = phi.degree
    ins = getattr(phi, "entry_with_insertion", None)
    if ins is not None:
        return ins(2, states[n], states[:n], ceiling, n)
    first = states[:n]
    sub = required_subceiling(
        states[n], _tags_of(first), phi.inert_tags, phi.anchor, ceiling, margin
    )
    base = phi.entry(first, sub)
    g = apply_vertex(states[n], base, ceiling, pos=0, margin=margin)
    images = [n] + list(range(n))
    return g.permute_active(Permutation(images))


def delta(phi: Cochain, margin: int = MARGIN) -> Cochain:
    """The coboundary: C^n_m -> C^{n+1}_{m-1} by the three-part sum."""
    if isinstance(phi.comp_m, int) and phi.comp_m < 1:
        raise ValueError("delta needs composability m >= 1")
    require_valid(phi)
    n = phi.degree

    def entry_fn(states, ceiling):
        states = tuple(states)
        acc = _leading_term(phi, states, ceiling, margin)
        for i in range(1, n + 1):
            term = middle_term(phi, states, i, ceiling, margin)
            acc = acc + (term if i % 2 == 0 else -term)
        trail = _trailing_term(phi, states, ceiling, margin)
        acc = acc + (trail if (n + 1) % 2 == 0 else -trail)
        return acc

    out = Cochain(
        n + 1,
        phi.comp_m - 1 if isinstance(phi.comp_m, int) else phi.comp_m,
        phi.cutoff,
        entry_fn,
        phi.anchor,
        phi.inert_tags,
        f"delta[{phi.label}]",
        {"lder": phi.flags.get("lder", "unchecked"), "l0": phi.flags.get("l0", "unchecked")},
        phi.w_mult,
    )
    if getattr(phi, "structural_zero", False):
        out.structural_zero = True
    return out


def delta_half(phi: Cochain, margin: int = MARGIN) -> Cochain:
    """The (2,1/2) slot coboundary into (3,0): the four-term formula.

    The two E-insertion terms are the difference-direction reconstructions
    (their stabilization is the operational surrogate for the two
    convergence conditions defining C^2_{1/2}); the outer terms are the
    Y_W applications. Raises NonStabilization when a surrogate fails.
    """
    if phi.degree != 2:
        raise ValueError("delta_half acts on 2-cochains")
    require_valid(phi)

    def entry_fn(states, ceiling):
        states = tuple(states)
        acc = _leading_term(phi, states, ceiling, margin)
        term2 = middle_term(phi, states, 2, ceiling, margin)
        acc = acc + term2
        term1 = middle_term(phi, states, 1, ceiling, margin)
        acc = acc - term1
        trail = _trailing_term(phi, states, ceiling, margin)
        acc = acc - trail
        return acc

    return Cochain(
        3, 0, phi.cutoff, entry_fn, phi.anchor, phi.inert_tags,
        f"delta_half[{phi.label}]",
        {"lder": phi.flags.get("lder", "unchecked"), "l0": phi.flags.get("l0", "unchecked")},
        phi.w_mult,
    )


def check_complex(
    phi: Cochain,
    cutoff: int | None = None,
    ceiling: int = 1,
    half_path: bool = False,
    margin: int = MARGIN,
) -> dict:
    """Assert delta(delta(Phi)) = 0 entry by entry on the tuple domain.

    With half_path=True the second arrow is delta^2_{1/2} (requires Phi at
    (1,2) so delta Phi sits in C^2_{1/2}).
    """
    cutoff = phi.cutoff if cutoff is None else cutoff
    start = time.time()
    d1 = delta(phi, margin)
    d2 = delta_half(d1, margin) if half_path else delta(d1, margin)
    tuples = enumerate_tuples(phi.degree + 2, cutoff, cutoff)
    failures = []
    for t in tuples:
        sec = d2.entry(t, ceiling)
        if not sec.is_zero():
            failures.append(
                {
                    "tuple": [s.to_text() for s in t],
                    "nonzero": {
                        s.to_text(): f.to_obj() for s, f in sec.pairings.items()
                    },
                }
            )
    return {
        "cochain": phi.label,
        "slot": [phi.degree, phi.comp_m],
        "half_path": half_path,
        "tuples_checked": len(tuples),
        "ceiling": ceiling,
        "ok": not failures,
        "failures": failures[:3],
        "seconds": round(time.time() - start, 3),
    }


# ---------------------------------------------------------------------------
# exact ranks


def bareiss_rank(rows: list) -> int:
    """Fraction-free (Bareiss) rank of an exact rational matrix."""
    if not rows:
        return 0
    # clear denominators row-wise (row scaling preserves rank)
    m = []
    for row in rows:
        den = 1
        for x in row:
            den = den * x.denominator // _gcd(den, x.denominator)
        m.append([int(x * den) for x in row])
    nr, nc = len(m), len(m[0])
    rank = 0
    prev = 1
    row = 0
    for col in range(nc):
        piv = None
        for r in range(row, nr):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        for r in range(row + 1, nr):
            for c in range(col + 1, nc):
                m[r][c] = (m[r][c] * m[row][col] - m[r][col] * m[row][c]) // prev
            m[r][col] = 0
        prev = m[row][col]
        rank += 1
        row += 1
        if row == nr:
            break
    return rank


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _vectorize(cochain: Cochain, tuples, ceiling: int) -> dict:
    """Exact coordinates of a cochain: (tuple, state, monomial) -> value.

    RatFuncs are put over the weight-additive common denominator per
    coordinate slot so that coordinates are well-defined linearly."""
    coords = {}
    for t in tuples:
        sec = cochain.entry(t, ceiling)
        for s, f in sec.pairings.items():
            # common denominator: multiply up to the full ansatz so that the
            # numerator coefficients are linear coordinates
            amb_wts = _tags_of(t)
            alpha = [_axis_bound(w, cochain.anchor) for w in amb_wts]
            betas = {}
            allw = list(amb_wts)
            for p in range(len(allw)):
                for q in range(p + 1, len(allw)):
                    betas[(p, q)] = allw[p] + allw[q]
            num = f.num
            from .ratfield import MultiPoly

            mult = MultiPoly.const(f.n, 1)
            for idx, a in enumerate(alpha):
                extra = a - f.axis[idx]
                if extra < 0:
                    raise ValueError("axis order beyond the declared ansatz")
                if extra:
                    mono = tuple(extra if k == idx else 0 for k in range(f.n))
                    mult = mult.mul_monomial(mono)
            for key, b in betas.items():
                extra = b - f.diff.get(key, 0)
                if extra < 0:
                    raise ValueError("difference order beyond the declared ansatz")
                if extra:
                    mult = mult * MultiPoly.diff(f.n, *key).pow(extra)
            num = num * mult
            for e, c in num.terms.items():
                coords[(t, s, e)] = c
    return coords


def truncated_cohomology(
    n: int,
    m,
    cutoff: int = 3,
    ceiling: int = 1,
    half_slot: bool = False,
    margin: int = MARGIN,
) -> dict:
    """Family-relative cohomology dimensions at slot (n, m).

    Generating family: E-built n-cochains over every basis w of weight <=
    cutoff, together with the delta-images of the (n-1, m+1) E-family (so
    the image span lies inside the kernel family's span). All ranks are
    exact (Bareiss); dimensions are truncation-relative by construction.
    """
    from .cochains import from_E
    from .heisenberg import ModuleVector as MV

    start = time.time()
    ws = [MV.basis(s) for s in states_up_to(cutoff)]
    family = [from_E(n, w, m, cutoff) for w in ws]
    incoming = []
    if n >= 1:
        lower = [from_E(n - 1, w, m + 1 if isinstance(m, int) else 3, cutoff) for w in ws]
        for g in lower:
            g.flags.update({"lder": "verified", "l0": "verified"})
            incoming.append(delta(g, margin))
    for f in family:
        f.flags.update({"lder": "verified", "l0": "verified"})
    kernel_family = family + incoming

    out_op = delta_half if half_slot else delta
    tuples_out = enumerate_tuples(n + 1, cutoff, cutoff)
    tuples_here = enumerate_tuples(n, cutoff, cutoff)

    # span dimension of the kernel family
    fam_vecs = [_vectorize(f, tuples_here, ceiling) for f in kernel_family]
    fam_rank = _rank_from_coords(fam_vecs)

    # outgoing differential on the kernel family
    out_vecs = [_vectorize(out_op(f, margin), tuples_out, ceiling) for f in kernel_family]
    out_rank = _rank_from_coords(out_vecs)

    # incoming image span
    in_vecs = [_vectorize(g, tuples_here, ceiling) for g in incoming]
    in_rank = _rank_from_coords(in_vecs)

    # exact containment: the image members map to zero under the outgoing op
    containment = []
    for g in incoming:
        dg = out_op(g, margin)
        bad = []
        for t in tuples_out:
            sec = dg.entry(t, ceiling)
            if not sec.is_zero():
                bad.append([s.to_text() for s in t])
        containment.append(not bad)

    ker_dim = fam_rank - out_rank
    h_dim = ker_dim - in_rank
    return {
        "slot": [n, "1/2" if half_slot else m],
        "family_size": len(kernel_family),
        "family_span": fam_rank,
        "rank_delta_out": out_rank,
        "rank_delta_in": in_rank,
        "kernel_dim": ker_dim,
        "cohomology_dim_family_relative": h_dim,
        "rank_nullity_ok": fam_rank == out_rank + ker_dim,
        "image_in_kernel": all(containment),
        "seconds": round(time.time() - start, 3),
    }


def _rank_from_coords(vecs: list) -> int:
    keys = sorted({k for v in vecs for k in v}, key=lambda k: (str(k[0]), str(k[1]), k[2]))
    if not keys or not vecs:
        return 0
    rows = [[v.get(k, Q(0)) for v in vecs] for k in keys]
    return bareiss_rank(rows)
