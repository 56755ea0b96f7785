import pytest
from fractions import Fraction as Q

from voaworkbench.correlators import (
    apply_vertex,
    compose_left,
    e_section,
    intertwiner,
    matrix_element,
    wick_pure_a,
)
from voaworkbench.heisenberg import (
    GEN,
    VACUUM,
    FockState,
    ModuleVector,
    bilinear_form,
    gram_norm,
    states_up_to,
    virasoro,
)
from voaworkbench.ratfield import MultiPoly, Permutation, RatFunc
from voaworkbench.sections import RationalSection

A = ModuleVector.basis(GEN)
ONE = ModuleVector.basis(VACUUM)


def st(*parts):
    return FockState(parts)


def test_two_point_function():
    # <1, Y(a,z1) Y(a,z2) 1> = 1/(z1-z2)^2
    val = matrix_element(ONE, (GEN, GEN), ONE, check_region=True)
    assert val == RatFunc.diff_inv(2, 0, 1, 2)


def test_identity_insertion():
    # <w', Y(1, z1) w> = <w', w> constant
    w = ModuleVector.basis(st(2, 1))
    val = matrix_element(w, (VACUUM,), w)
    assert val == RatFunc.const(1, bilinear_form(w, w))


def test_four_point_wick():
    val = matrix_element(ONE, (GEN,) * 4, ONE)
    assert val == wick_pure_a(4)


def test_wick_odd_is_zero():
    assert wick_pure_a(3).is_zero()
    assert matrix_element(ONE, (GEN,) * 3, ONE).is_zero()


def test_two_point_heavier_states():
    # <1, Y(a(-2),z1) Y(a(-2),z2) 1> = d_{z1} d_{z2} 1/(z1-z2)^2 ... compute
    # directly: contraction of da(z1) da(z2) = -6/(z1-z2)^4... verify against
    # the mode-sum engine by an explicit derivative of the 2-point function
    base = RatFunc.diff_inv(2, 0, 1, 2)
    want = base.partial(0).partial(1)
    val = matrix_element(ONE, (st(2), st(2)), ONE, check_region=True)
    assert val == want


def test_mixed_two_point():
    # <1, Y(a,z1) Y(a(-2),z2) 1> = d_{z2} 1/(z1-z2)^2 = 2/(z1-z2)^3
    val = matrix_element(ONE, (GEN, st(2)), ONE)
    assert val == RatFunc.diff_inv(2, 0, 1, 3).scale(2)


def test_one_point_with_module_states():
    # <a, Y(a,z) a> has a genuine z-pole: <a, a(z) a> = <a,a>... compute and
    # compare with hand value: a(z)a = sum a(m)a z^-m-1; <a, a(-1)a(0)...>
    # pairing forces weight 1 components: m = -1 gives a(-1)^2|0> (weight 2,
    # killed), m = 1 gives |0> (weight 0, killed); m = 0 gives 0. So value 0.
    val = matrix_element(A, (GEN,), A)
    assert val.is_zero()


def test_one_point_vacuum_pairing():
    # <1, Y(a,z) a> = <1, [sum_m a(m) a z^{-m-1}]>: m=1 term gives |0> z^-2
    val = matrix_element(ONE, (GEN,), A)
    assert val == RatFunc.monomial_inv(1, 0, 2)


def test_region_independence_three_point():
    ins = (GEN, st(2), GEN)
    w = ModuleVector.basis(st(1))
    wp = ModuleVector.basis(st(2))
    val = matrix_element(wp, ins, w, check_region=True)
    # also compare against a third ordering by explicit permutation
    perm = Permutation([2, 0, 1])  # z1->z3, z2->z1, z3->z2
    ins2 = (ins[1], ins[2], ins[0])
    val2 = matrix_element(wp, ins2, w)
    # matrix_element(ins2) is <.., Y(v2,y1)Y(v3,y2)Y(v1,y3)..>; matching
    # variables y1=z2, y2=z3, y3=z1 means permuting val2's vars by y_k -> z_*
    assert val2.permute(Permutation([1, 2, 0])) == val


def test_locality_at_E_level():
    # E(2)(v1,v2;w)(z1,z2) = swap of E(2)(v2,v1;w)(z2,z1)
    w = ModuleVector.basis(st(1))
    for v1, v2 in [(GEN, st(2)), (st(1, 1), GEN)]:
        s12 = e_section((v1, v2), w, 3)
        s21 = e_section((v2, v1), w, 3)
        swap = Permutation.transposition(2, 0, 1)
        for t, f in s12.pairings.items():
            assert s21.pairings.get(t, RatFunc.zero(2)).permute(swap) == f


def test_e_section_identity_slot():
    # E(1)(1; w) = constant section w
    w = ModuleVector.basis(st(2))
    sec = e_section((VACUUM,), w, 3)
    for t, f in sec.pairings.items():
        assert f == RatFunc.const(1, bilinear_form(ModuleVector.basis(t), w))


def test_e_section_pairing_matches_matrix_element():
    sec = e_section((GEN, GEN), ONE, 4)
    for t in states_up_to(4):
        got = sec.pairings.get(t, RatFunc.zero(2))
        want = matrix_element(ModuleVector.basis(t), (GEN, GEN), ONE)
        assert got == want, t


def test_lder_property_of_correlators():
    # d_{z_i} <w', ...> equals the insertion of L(-1)v_i
    wp = ModuleVector.basis(st(2, 1))
    w = ModuleVector.basis(st(1))
    ins = (GEN, st(2))
    val = matrix_element(wp, ins, w)
    for i in range(2):
        lhs = val.partial(i)
        shifted = list(ins)
        lv = virasoro(-1, ModuleVector.basis(ins[i]))
        rhs = RatFunc.zero(2)
        for s, c in lv.items():
            shifted[i] = s
            rhs = rhs + matrix_element(wp, tuple(shifted), w).scale(c)
        assert lhs == rhs, i


def test_L0_conjugation_of_correlators():
    # scaling all z by rational lam rescales by lam^{wt w' - wt w - sum wt v}
    wp = ModuleVector.basis(st(2))
    w = ModuleVector.basis(st(1))
    ins = (GEN, st(2))
    val = matrix_element(wp, ins, w)
    d = 2 - 1 - (1 + 2)
    for lam in (Q(2), Q(3), Q(-1)):
        assert val.scale_all_vars(lam) == val.scale(lam**d)


def test_intertwiner_identity_cases():
    # Y(1, z) v = v (vacuum w side transported trivially)
    v = ModuleVector.basis(st(2))
    sec = intertwiner(ONE, v, 3)
    for t, f in sec.pairings.items():
        assert f == RatFunc.const(1, bilinear_form(ModuleVector.basis(t), v))
    # Y(w, z) 1 = e^{zL(-1)} w: pair with t gives polynomial in z
    w = A
    sec2 = intertwiner(w, ONE, 3)
    got = sec2.pairings.get(st(2))
    # e^{zL(-1)}a = a + z a(-2)|0> + ...: <a(-2)|0>, .> = z <a(-2),a(-2)>
    want = RatFunc(MultiPoly(1, {(1,): gram_norm(st(2))}))
    assert got == want


def test_intertwiner_skew_symmetry_adjoint_module():
    # for the adjoint module Y^W_{WV}(w,z)v = Y(w,z)v: pairings match E(1)
    w = ModuleVector.basis(st(2))
    v = A
    sec = intertwiner(w, v, 4)
    direct = e_section((st(2),), v, 4)
    for t in states_up_to(4):
        assert sec.pairings.get(t, RatFunc.zero(1)) == direct.pairings.get(
            t, RatFunc.zero(1)
        ), t


def test_compose_left_matches_full_build():
    # E(1)_W composed onto E(1)(a; w) equals E(2)(a', a; w)
    w = ModuleVector.basis(st(1))
    inner = e_section((GEN,), w, 9)
    out = compose_left((st(2),), inner, 3)
    want = e_section((st(2), GEN), w, 3)
    for t in states_up_to(3):
        assert out.pairings.get(t, RatFunc.zero(2)) == want.pairings.get(
            t, RatFunc.zero(2)
        ), t


def test_apply_vertex_insufficient_depth():
    from voaworkbench.ratfield import InsufficientDepth

    shallow = e_section((GEN,), ONE, 1)
    with pytest.raises(InsufficientDepth):
        apply_vertex(st(2), shallow, 3)
