import itertools

import pytest
from fractions import Fraction as Q

from voaworkbench.heisenberg import (
    GEN,
    VACUUM,
    FockState,
    ModuleVector,
    bilinear_form,
    dual_basis,
    exp_virasoro,
    gram_norm,
    mode_action,
    project_weight,
    states_of_weight,
    states_up_to,
    sugawara_L1,
    vertex_mode,
    vertex_mode_state,
    virasoro,
)

A = ModuleVector.basis(GEN)
ONE = ModuleVector.basis(VACUUM)


def st(*parts):
    return FockState(parts)


def test_mode_action_level_one():
    v = mode_action(1, ModuleVector.basis(st(1)))
    assert v == ONE


def test_mode_action_creation():
    assert mode_action(-2, ONE) == ModuleVector.basis(st(2))


def test_mode_action_no_matching_part():
    # a(2) on a(-1)^2|0> = 0
    assert mode_action(2, ModuleVector.basis(st(1, 1))).is_zero()


def test_mode_action_multiplicity():
    # a(1) on a(-1)^2|0> = 2 a(-1)|0>
    assert mode_action(1, ModuleVector.basis(st(1, 1))) == A.scale(2)


def test_vertex_mode_identity_state():
    # 1(n) w = delta_{n,-1} w
    w = ModuleVector.basis(st(2, 1))
    assert vertex_mode(ONE, -1, w) == w
    assert vertex_mode(ONE, 0, w).is_zero()


def test_vertex_mode_generator_is_mode():
    # (a)(p) = a(p) for all p in range
    w = ModuleVector.basis(st(3, 1))
    for p in range(-4, 5):
        assert vertex_mode(A, p, w) == mode_action(p, w)


def test_vertex_mode_zero_and_pairing_examples():
    # (a)(0) a = 0 and (a)(1) a = |0>
    assert vertex_mode(A, 0, A).is_zero()
    assert vertex_mode(A, 1, A) == ONE


def test_vertex_mode_weight_bookkeeping():
    # weight of v(p)w is wt v + wt w - p - 1
    v = ModuleVector.basis(st(2, 1))
    w = ModuleVector.basis(st(1, 1))
    for p in range(-3, 6):
        out = vertex_mode(v, p, w)
        if out:
            assert out.weight() == 3 + 2 - p - 1


def test_creation_property():
    # Y(v,z)|0> has no negative modes and its z^0 coefficient is v
    for s in states_up_to(4):
        v = ModuleVector.basis(s)
        for p in range(0, s.weight + 2):
            assert vertex_mode(v, p, ONE).is_zero(), (s, p)
        assert vertex_mode(v, -1, ONE) == v


def test_virasoro_grading():
    v = ModuleVector.basis(st(2, 1))
    assert virasoro(0, v) == v.scale(3)


def test_virasoro_translation_kills_vacuum():
    assert virasoro(-1, ONE).is_zero()


def test_virasoro_L1_example():
    # L(1) a(-2)|0> = 2 a(-1)|0>
    assert virasoro(1, ModuleVector.basis(st(2))) == A.scale(2)


def test_L1_matches_sugawara_oracle():
    for s in states_up_to(5):
        v = ModuleVector.basis(s)
        assert virasoro(1, v) == sugawara_L1(v), s


def test_Lminus1_derivation_on_vertex_modes():
    # [L(-1), v(p)] = (L(-1)v)(p); equivalently the translation property
    for s in states_up_to(3):
        v = ModuleVector.basis(s)
        w = ModuleVector.basis(st(1))
        for p in range(-3, 4):
            lhs = virasoro(-1, vertex_mode(v, p, w)) - vertex_mode(v, p, virasoro(-1, w))
            rhs = vertex_mode(virasoro(-1, v), p, w)
            assert lhs == rhs, (s, p)


def test_virasoro_triple():
    # [L(0), L(1)] = -L(1), [L(0), L(-1)] = L(-1), [L(1), L(-1)] = 2 L(0)
    for s in states_up_to(4):
        v = ModuleVector.basis(s)
        c1 = virasoro(0, virasoro(1, v)) - virasoro(1, virasoro(0, v))
        assert c1 == virasoro(1, v).scale(-1), s
        c2 = virasoro(0, virasoro(-1, v)) - virasoro(-1, virasoro(0, v))
        assert c2 == virasoro(-1, v), s
        c3 = virasoro(1, virasoro(-1, v)) - virasoro(-1, virasoro(1, v))
        assert c3 == virasoro(0, v).scale(2), s


def test_form_normalization_and_weight_orthogonality():
    assert bilinear_form(ONE, ONE) == 1
    for sa in states_up_to(4):
        for sb in states_up_to(4):
            if sa.weight != sb.weight:
                assert bilinear_form(
                    ModuleVector.basis(sa), ModuleVector.basis(sb)
                ) == 0


def test_form_symmetry():
    for lam in (Q(1), Q(2), Q(-1), Q(1, 3)):
        for sa in states_up_to(4):
            for sb in states_up_to(4):
                a = ModuleVector.basis(sa)
                b = ModuleVector.basis(sb)
                assert bilinear_form(a, b, lam) == bilinear_form(b, a, lam)


def test_form_adjoint_example():
    # <a,a>_lam = lam^-2 via the adjoint relation
    for lam in (Q(1), Q(2), Q(-3)):
        assert bilinear_form(A, A, lam) == lam ** -2


def test_form_invariance_series():
    # <Y(u,z)a, b> = <a, Y+(u,z)b> coefficient-wise: u(p)^+ for u = a is
    # (-1)^{p+1} lam^{2p} a(-p); check mode by mode for the generator
    lam = Q(2)
    for sa in states_up_to(3):
        for sb in states_up_to(3):
            a = ModuleVector.basis(sa)
            b = ModuleVector.basis(sb)
            for p in range(-3, 4):
                lhs = bilinear_form(mode_action(p, a), b, lam)
                rhs = bilinear_form(a, mode_action(-p, b), lam) * Q(
                    (-1) ** (p + 1)
                ) * lam ** (2 * p)
                assert lhs == rhs


def test_form_invariance_general_vertex_mode():
    # <v(p) a, b> = <a, (v+(p)) b> where Y+(v,z) = T Y(v,z) T^{-1}; verified
    # through the mode transport computed two ways for v = a(-2)|0>
    lam = Q(1)
    v = ModuleVector.basis(st(2))
    # Y+(a(-2)|0>, z): a(-2)|0> has weight 2 with L(1) a(-2)|0> = 2a(-1)|0>
    # instead of expanding the closed form, verify invariance numerically via
    # the defining recursion: move one a-mode at a time
    for sa in states_up_to(3):
        for sb in states_up_to(3):
            a = ModuleVector.basis(sa)
            b = ModuleVector.basis(sb)
            for p in range(-2, 4):
                lhs = bilinear_form(vertex_mode(v, p, a), b, lam)
                # Y(a(-2)|0>, z) = da(z) = sum_m a(m)(-m-1) z^{-m-2}, so
                # (a(-2)|0>)(p) = -p a(p-1); adjoint via the generator adjoint
                coeff = -p
                if coeff == 0:
                    assert lhs == 0
                    continue
                m = p - 1
                rhs = bilinear_form(
                    a, mode_action(-m, b)
                ) * coeff * Q((-1) ** (m + 1)) * lam ** (2 * m)
                assert lhs == rhs, (sa, sb, p)


def test_gram_invertibility_and_duals():
    for l in range(0, 6):
        basis, duals = dual_basis(l)
        for i, u in enumerate(basis):
            for j, ub in enumerate(duals):
                assert bilinear_form(u, ub) == (1 if i == j else 0)


def test_dual_basis_weight_one():
    basis, duals = dual_basis(1)
    assert basis == [A]
    norm = gram_norm(GEN)
    assert duals[0] == A.scale(1 / norm)


def test_dual_basis_weight_zero():
    basis, duals = dual_basis(0)
    assert basis == [ONE] and duals == [ONE]


def test_project_weight():
    v = ONE + A
    assert project_weight(0, v) == ONE
    assert project_weight(5, ONE).is_zero()
    got = project_weight(2, virasoro(-1, A))
    assert got == virasoro(-1, A)  # L(-1)a is homogeneous of weight 2
    assert got == ModuleVector.basis(st(2))


def test_exp_virasoro_L1_terminates():
    v = ModuleVector.basis(st(2, 1))
    out = exp_virasoro(1, Q(1, 2), v)
    # applying L(1) enough times kills any state
    assert project_weight(3, out) == v


def test_state_text_round_trip():
    for s in states_up_to(6):
        assert FockState.from_text(s.to_text()) == s
    assert st(2, 1, 1).to_text() == "a(-2)a(-1)^2|0>"


def test_module_vector_serialization():
    v = A.scale(Q(2, 3)) + ModuleVector.basis(st(2, 2), Q(-5))
    assert ModuleVector.from_obj(v.to_obj()) == v
