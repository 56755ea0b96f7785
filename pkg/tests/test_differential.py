import pytest
from fractions import Fraction as Q

from voaworkbench.cochains import (
    corrupted,
    enumerate_tuples,
    from_E,
    from_YW,
    from_module_vector,
    linear_combination,
    random_valid,
    validate_lder,
    validate_shuffle,
    zero_cochain,
)
from voaworkbench.correlators import matrix_element
from voaworkbench.differential import (
    bareiss_rank,
    check_complex,
    delta,
    delta_half,
    middle_term,
    truncated_cohomology,
)
from voaworkbench.heisenberg import (
    GEN,
    VACUUM,
    FockState,
    ModuleVector,
    states_up_to,
)
from voaworkbench.ratfield import RatFunc

A = ModuleVector.basis(GEN)
ONE = ModuleVector.basis(VACUUM)


def st(*parts):
    return FockState(parts)


def mark_valid(c):
    c.flags.update({"lder": "verified", "l0": "verified"})
    return c


def test_delta_zero_cochain():
    z = zero_cochain(1, 2, 3)
    d = delta(z)
    for tup in enumerate_tuples(2, 2, 2):
        assert d.entry(tup, 1).is_zero()


def test_delta_on_0_cochain_literal_cancellation():
    # the n = 0 edge of the displayed formula: first and last terms cancel
    # exactly; the cancellation is computed, not assumed
    w0 = mark_valid(from_module_vector(A, m=3))
    d = delta(w0)
    for tup in enumerate_tuples(1, 2, 2):
        assert d.entry(tup, 2).is_zero()


def test_delta_of_E1_matches_term_oracle():
    # for the E-built 1-cochain the three delta terms each equal the 2-point
    # section (associativity), so delta(E1) = (1 - 1 + 1) E2 = E2
    phi = mark_valid(from_YW(A, m=2))
    d = delta(phi)
    for tup in [(GEN, GEN), (GEN, st(2)), (st(1, 1), GEN)]:
        sec = d.entry(tup, 2)
        for t in states_up_to(2):
            want = matrix_element(ModuleVector.basis(t), tup, A)
            assert sec.pairings.get(t, RatFunc.zero(2)) == want, (tup, t)


def test_delta_linearity():
    p1 = mark_valid(from_YW(A, m=2))
    p2 = mark_valid(from_YW(ModuleVector.basis(st(1)), m=2))
    lc = mark_valid(linear_combination([(Q(2), p1), (Q(-3), p2)]))
    d_lc = delta(lc)
    d1, d2 = delta(p1), delta(p2)
    for tup in [(GEN, GEN), (st(2), GEN)]:
        want = d1.entry(tup, 2).scale(2) + d2.entry(tup, 2).scale(-3)
        assert d_lc.entry(tup, 2) == want


def test_middle_term_locus_and_shape():
    phi = mark_valid(from_YW(A, m=2))
    sec = middle_term(phi, (GEN, GEN), 1, 2)
    assert sec.active == 2
    for f in sec.pairings.values():
        for (i, j) in f.diff:
            assert (i, j) == (0, 1)


def test_delta_squared_is_zero():
    phi = mark_valid(from_YW(A, m=3))
    rep = check_complex(phi, cutoff=2, ceiling=1)
    assert rep["ok"], rep["failures"]


def test_delta_squared_zero_random_combination():
    phi = mark_valid(random_valid(1, 3, seed=11, cutoff=3))
    rep = check_complex(phi, cutoff=2, ceiling=1)
    assert rep["ok"], rep["failures"]


def test_half_path_complex_condition():
    phi = mark_valid(from_YW(A, m=2))
    rep = check_complex(phi, cutoff=2, ceiling=1, half_path=True)
    assert rep["ok"], rep["failures"]


def test_delta_half_zero():
    z = zero_cochain(2, 0, 3)
    z.flags.update({"lder": "verified", "l0": "verified"})
    dh = delta_half(z)
    for tup in enumerate_tuples(3, 1, 1):
        assert dh.entry(tup, 1).is_zero()


def test_delta_half_term_oracle():
    # on the E-built 2-cochain over w the four terms are all E3 sections:
    # signs (1 + 1 - 1 - 1) = 0, so delta_half(E2) = 0 -- computed outcome
    phi = mark_valid(from_E(2, A, m=1))
    dh = delta_half(phi)
    for tup in [(GEN, GEN, GEN)]:
        assert dh.entry(tup, 1).is_zero()


def test_delta_requires_flags():
    phi = from_YW(A, m=2)
    bad = corrupted(phi, (GEN,), RatFunc.monomial_inv(1, 0))
    rep = validate_lder(bad, enumerate_tuples(1, 1, 1), 1)
    bad.flags.update({"lder": rep["lder1"], "l0": "unchecked"})
    assert rep["lder1"] == "failed"
    with pytest.raises(ValueError):
        delta(bad)


def test_delta_output_passes_lder_and_shuffle():
    phi = mark_valid(from_YW(A, m=3))
    d = delta(phi)
    dom = [(GEN, GEN), (GEN, st(2))]
    rep = validate_lder(d, dom, 1)
    assert rep["lder1"] == "verified"
    rep2 = validate_shuffle(d, [(GEN, st(2))], 1)
    assert rep2["shuffle"] == "verified"


def test_short_sequence_composes_to_zero():
    # 0 -> C^0_3 -> C^1_2 -> C^2_{1/2} -> C^3_0 -> 0: both interior junctions
    chi = mark_valid(from_module_vector(A, m=3))
    d_chi = delta(chi)  # lands in (1,2); identically zero by the n=0 edge
    for tup in enumerate_tuples(1, 2, 2):
        assert d_chi.entry(tup, 1).is_zero()
    phi = mark_valid(from_YW(A, m=2))
    rep = check_complex(phi, cutoff=2, ceiling=1, half_path=True)
    assert rep["ok"]


def test_bareiss_rank():
    m = [
        [Q(1), Q(2), Q(3)],
        [Q(2), Q(4), Q(6)],
        [Q(0), Q(1), Q(1)],
    ]
    assert bareiss_rank(m) == 2
    assert bareiss_rank([[Q(0), Q(0)]]) == 0
    assert bareiss_rank([[Q(1, 7), Q(0)], [Q(0), Q(3, 5)]]) == 2


def test_truncated_cohomology_slot_1_2():
    rep = truncated_cohomology(1, 2, cutoff=2, ceiling=1)
    assert rep["rank_nullity_ok"]
    assert rep["image_in_kernel"]
    assert rep["cohomology_dim_family_relative"] >= 0


def test_truncated_cohomology_half_slot():
    rep = truncated_cohomology(2, "1/2", cutoff=1, ceiling=1, half_slot=True)
    assert rep["rank_nullity_ok"]
    assert rep["image_in_kernel"]
    assert rep["cohomology_dim_family_relative"] >= 0
