import itertools
import json
from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from design_gradcode import (
    StragglerScenario,
    affine_geometry,
    code_from_design,
    decode,
    decode_dual,
    decode_resolvable,
    decode_symmetric,
    frc_code,
    hadamard_design,
    oracle_decode,
    pg_error_formula,
    projective_geometry,
    rank_one_update_inverse,
    straggler_profile,
    uncoded_code,
    worst_case_error,
)
from design_gradcode.decoder import (
    StragglerProfile,
    normal_residual,
    resolvable_error,
)
from design_gradcode.errors import MethodUnavailable, SingularUpdate, TooLarge, WrongKind
from design_gradcode.gradcode import CodeKind

from oracles import lstsq_exact

F = Fraction


def sc(N, dead=()):
    return StragglerScenario(N, tuple(dead))


# oracle ---------------------------------------------------------------------


def test_uncoded_one_straggler():
    r = oracle_decode(uncoded_code(4).E, sc(4, [0]))
    assert r.v_opt == (1, 1, 1) and r.err == 1 and r.method == "oracle-exact"


def test_fano_full_recovery(fano_code):
    assert oracle_decode(fano_code.E, sc(7)).err == 0


def test_fano_two_stragglers_exact(fano_code):
    for dead in itertools.combinations(range(7), 2):
        assert oracle_decode(fano_code.E, sc(7, dead)).err == F(4, 7)


def test_oracle_matches_sympy_pinv(ag_code, dual_ag_code):
    rng = np.random.default_rng(7)
    E = rng.integers(0, 3, size=(6, 8))
    E[:, 0] = 0  # force rank deficiency
    E[:, 1] = E[:, 2]
    cases = [(E, sc(8, [5])), (E, sc(8)), (ag_code.E, sc(12, [0, 4, 7])),
             (dual_ag_code.E, sc(9, [1, 2]))]
    for mat, s in cases:
        got = oracle_decode(mat, s)
        v, err = lstsq_exact(mat.tolist(), list(s.F))
        assert got.err == err
        assert list(got.v_opt) == v  # minimum-norm solution


def test_exact_and_float_paths_agree(ag_code):
    for dead in [(), (0,), (0, 3, 6), (1, 2, 5, 9, 11)]:
        s = sc(12, dead)
        a = oracle_decode(ag_code.E, s, exact=True)
        b = oracle_decode(ag_code.E, s, exact=False)
        assert a.exact and not b.exact
        assert abs(float(a.err) - b.err) <= 1e-9


def test_real_matrix_uses_float_path():
    E = np.array([[0.5, 1.0], [1.0, 0.25]])
    r = oracle_decode(E, sc(2))
    assert r.method == "oracle-float" and r.err < 1e-20
    with pytest.raises(ValueError):
        oracle_decode(E, sc(2), exact=True)


def test_scenario_validation():
    with pytest.raises(ValueError):
        sc(3, [0, 1, 2])
    with pytest.raises(ValueError):
        sc(3, [3])
    with pytest.raises(ValueError):
        StragglerScenario(3, (1, 1))
    s = StragglerScenario.from_survivors(5, [4, 0])
    assert s.stragglers == (1, 2, 3) and s.F == (0, 4) and s.S == 3


# closed forms ---------------------------------------------------------------


def test_decode_symmetric_examples(fano_code):
    r = decode_symmetric(fano_code, sc(7, [0, 1]))
    assert r.v_opt == (F(3, 7),) * 5 and r.err == F(4, 7) and r.method == "thm1"
    r = decode_symmetric(fano_code, sc(7))
    assert r.v_opt == (F(1, 3),) * 7 and r.err == 0


def test_pg25_six_stragglers():
    code = code_from_design(projective_geometry(2, 5))
    s = sc(31, range(6))
    assert decode_symmetric(code, s).err == 1
    assert oracle_decode(code.E, s).err == 1


def test_decode_dual_examples(dual_ag_code):
    r = decode_dual(dual_ag_code, sc(9, [3, 8]))
    assert r.v_opt == (F(2, 5),) * 7 and r.err == F(4, 5) and r.method == "thm2"
    assert decode_dual(dual_ag_code, sc(9)).err == 0
    errs = {oracle_decode(dual_ag_code.E, sc(9, d)).err for d in itertools.combinations(range(9), 2)}
    assert errs == {F(4, 5)}


def test_wrong_kind(fano_code, ag_code, dual_ag_code):
    with pytest.raises(WrongKind):
        decode_symmetric(ag_code, sc(12))
    with pytest.raises(WrongKind):
        decode_dual(fano_code, sc(7))
    with pytest.raises(WrongKind):
        decode_resolvable(dual_ag_code, sc(9))
    with pytest.raises(WrongKind):
        straggler_profile(fano_code, sc(7))
    custom = code_from_design(projective_geometry(2, 2), kind="custom")
    with pytest.raises(WrongKind):
        decode(custom, sc(7), "closed_form")
    assert decode(custom, sc(7, [0])).method == "oracle-exact"
    with pytest.raises(ValueError):
        decode(custom, sc(7), "bogus")


def test_profiles(ag_code):
    firsts = [g[0] for g in ag_code.groups]
    assert straggler_profile(ag_code, sc(12, firsts)).s == (1, 1, 1, 1)
    assert straggler_profile(ag_code, sc(12)).s == (0, 0, 0, 0)
    assert straggler_profile(ag_code, sc(12, ag_code.groups[0])).s == (3, 0, 0, 0)


def _with_profile(code, s):
    dead = [j for grp, k in zip(code.groups, s) for j in grp[:k]]
    return sc(code.N, dead)


def test_resolvable_case1(ag_code):
    s = _with_profile(ag_code, (0, 1, 1, 1))
    r = decode_resolvable(ag_code, s)
    assert r.err == 0 and r.method == "thm3-case1"
    chosen = [j for j, x in zip(s.F, r.v_opt) if x == 1]
    assert chosen == list(ag_code.groups[0])
    assert all(x in (0, 1) for x in r.v_opt)


def test_resolvable_one_per_group(ag_code):
    s = _with_profile(ag_code, (1, 1, 1, 1))
    r = decode_resolvable(ag_code, s)
    assert r.v_opt == (F(1, 3),) * 8 and r.err == 1 and r.method == "thm3-case2"
    assert oracle_decode(ag_code.E, s).err == 1


def test_resolvable_dead_group(ag_code):
    s = _with_profile(ag_code, (3, 1, 1, 1))
    r = decode_resolvable(ag_code, s)
    assert set(r.v_opt) == {F(3, 7)}
    assert r.err == oracle_decode(ag_code.E, s).err
    assert all(x == 0 for x in normal_residual(ag_code.E, s, r.v_opt))


def test_corrected_error_expansion():
    # the expansion with a leading factor 2 on the middle sum is negative here
    prof = StragglerProfile.from_counts((1, 1, 1, 1), 3)
    assert resolvable_error(prof, 9, 3, 1) == 1


# exhaustive equivalences ---------------------------------------------------


def _closed_vs_oracle(code, max_s):
    for S in range(max_s + 1):
        for dead in itertools.combinations(range(code.N), S):
            s = sc(code.N, dead)
            closed = decode(code, s, "closed_form")
            oracle = oracle_decode(code.E, s)
            assert closed.err == oracle.err, (dead, closed.err, oracle.err)
            assert all(x == 0 for x in normal_residual(code.E, s, closed.v_opt))


def test_small_codes_exact_equivalence():
    codes = [code_from_design(projective_geometry(2, 2)),
             code_from_design(hadamard_design(3)),
             code_from_design(affine_geometry(2, 2)[0], affine_geometry(2, 2)[1]),
             code_from_design(affine_geometry(2, 2)[0], dual=True),
             code_from_design(affine_geometry(2, 3)[0], dual=True)]
    for code in codes:
        _closed_vs_oracle(code, min(4, code.N - 1))


def _batched_float_err(E, F_list):
    EF = np.stack([E[:, list(F)] for F in F_list]).astype(float)
    v = np.linalg.pinv(EF) @ np.ones(E.shape[0])
    r = np.einsum("skn,sn->sk", EF, v) - 1
    return (r * r).sum(axis=1)


def _all_design_codes(max_n=31):
    out = []
    for q in (2, 3, 4, 5):
        pg = projective_geometry(2, q)
        out.append(code_from_design(pg))
        d, res = affine_geometry(2, q)
        out.append(code_from_design(d, res))
        out.append(code_from_design(d, dual=True))
    for q in (2, 3):
        d, res = affine_geometry(3, q)
        out.append(code_from_design(d, res))
        out.append(code_from_design(d, dual=True))
    out.append(code_from_design(projective_geometry(3, 2)))
    for m in (2, 3, 5, 6, 7, 8):
        out.append(code_from_design(hadamard_design(m)))
    return [c for c in out if c.N <= max_n]


@pytest.mark.parametrize("code", _all_design_codes(), ids=lambda c: c.summary().replace(" ", "_"))
def test_closed_form_vs_float_oracle(code):
    """Every S <= 4 scenario exhaustively plus random larger ones."""
    rng = np.random.default_rng(code.N * 1000 + code.K)
    scenarios = [d for S in range(min(4, code.N - 1) + 1)
                 for d in itertools.combinations(range(code.N), S)]
    for _ in range(1000 // len(_all_design_codes()) + 1):
        S = int(rng.integers(5, code.N)) if code.N > 5 else code.N - 1
        scenarios.append(tuple(sorted(rng.choice(code.N, S, replace=False).tolist())))
    by_size = defaultdict(list)
    for d in scenarios:
        by_size[len(d)].append(d)
    for S, group in by_size.items():
        F_list = [sc(code.N, d).F for d in group]
        oracle = _batched_float_err(code.E, F_list)
        closed = np.array([float(decode(code, sc(code.N, d), "closed_form").err) for d in group])
        assert np.max(np.abs(oracle - closed)) <= 1e-9


def test_straggler_set_invariance(fano_code, dual_ag_code):
    for code in (fano_code, dual_ag_code):
        for S in range(code.N):
            errs = {oracle_decode(code.E, sc(code.N, d)).err
                    for d in itertools.combinations(range(code.N), S)}
            assert len(errs) == 1
            assert errs == {decode(code, sc(code.N, range(S))).err}


def test_profile_invariance_and_case1(ag_code):
    by_profile = defaultdict(set)
    for S in range(12):
        for dead in itertools.combinations(range(12), S):
            s = sc(12, dead)
            prof = straggler_profile(ag_code, s).s
            err = oracle_decode(ag_code.E, s).err
            by_profile[tuple(sorted(prof))].add(err)
            if 0 in prof:
                assert err == 0
    assert all(len(v) == 1 for v in by_profile.values())


def test_monotone_and_zero_at_start():
    for q in (2, 3, 4, 5, 7, 8, 9):
        vals = [pg_error_formula(q, S) for S in range(q * q + q + 1)]
        assert vals[0] == 0 and all(a <= b for a, b in zip(vals, vals[1:]))
    for code in _all_design_codes(max_n=16):
        vals = [worst_case_error(code, S)[0] for S in range(code.N)]
        assert vals[0] == 0 and all(a <= b for a, b in zip(vals, vals[1:]))


# worst case --------------------------------------------------------------


def test_worst_case_fano(fano_code):
    a, _ = worst_case_error(fano_code, 2)
    b, witness = worst_case_error(fano_code, 2, "exhaustive")
    assert a == b == F(4, 7) and witness.S == 2


def test_worst_case_frc():
    code = frc_code(9, 3)
    err, witness = worst_case_error(code, 3, "exhaustive")
    assert err == 3 and set(witness.stragglers) in [set(g) for g in code.groups]
    with pytest.raises(MethodUnavailable):
        worst_case_error(code, 3)


def test_worst_case_zero(ag_code, dual_ag_code):
    for code in (ag_code, dual_ag_code, uncoded_code(5)):
        assert worst_case_error(code, 0, "exhaustive")[0] == 0


def test_worst_case_uncoded():
    code = uncoded_code(6)
    for S in range(6):
        assert worst_case_error(code, S, "exhaustive")[0] == S


def test_ag_worst_case_closed_matches_exhaustive(ag_code):
    want = [0, 0, 0, 0, 1, F(6, 5), F(3, 2), 2, 3, F(18, 5), F(9, 2), 6]
    for S in range(12):
        closed, witness = worst_case_error(ag_code, S)
        assert closed == want[S]
        assert oracle_decode(ag_code.E, witness).err == closed
    for S in (4, 5, 6):
        assert worst_case_error(ag_code, S, "exhaustive")[0] == want[S]


def test_subset_cap(monkeypatch, fano_code):
    monkeypatch.setenv("DESIGN_GRADCODE_MAX_SUBSETS", "20")
    with pytest.raises(TooLarge):
        worst_case_error(fano_code, 2, "exhaustive")  # C(7,2) = 21
    assert worst_case_error(fano_code, 1, "exhaustive")[0] == worst_case_error(fano_code, 1)[0]


def test_worst_case_range(fano_code):
    with pytest.raises(ValueError):
        worst_case_error(fano_code, 7)
    with pytest.raises(ValueError):
        worst_case_error(fano_code, 1, "guess")


# formulas ------------------------------------------------------------------


def test_pg_formula_examples(fano_code):
    assert pg_error_formula(2, 2) == F(4, 7) == decode(fano_code, sc(7, [0, 1])).err
    assert pg_error_formula(5, 6) == 1
    assert pg_error_formula(9, 0) == 0
    with pytest.raises(ValueError):
        pg_error_formula(2, 7)


def test_rank_one_examples():
    out = rank_one_update_inverse(np.eye(3), np.ones((3, 3)))
    assert np.allclose(out, np.eye(3) - np.ones((3, 3)) / 4)
    G_inv = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert np.array_equal(rank_one_update_inverse(G_inv, np.zeros((2, 2))), G_inv)
    with pytest.raises(SingularUpdate):
        rank_one_update_inverse(np.eye(2) / 2, -2 * np.diag([1.0, 0.0]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_rank_one_property(seed, n):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    G = Q @ np.diag(rng.uniform(1, 3, n)) @ Q.T
    u, w = rng.standard_normal(n), rng.standard_normal(n)
    H = 0.2 * np.outer(u, w) / (np.linalg.norm(u) * np.linalg.norm(w))
    out = rank_one_update_inverse(np.linalg.inv(G), H)
    assert np.allclose((G + H) @ out, np.eye(n), atol=1e-12, rtol=0)


def test_decode_result_json(ag_code):
    r = decode(ag_code, _with_profile(ag_code, (1, 1, 1, 1)))
    data = json.loads(r.to_json())
    assert data["err"] == {"exact": "1/1", "float": 1.0}
    assert data["profile"] == [1, 1, 1, 1] and data["S"] == 4
    assert data["v_opt"] == [pytest.approx(1 / 3)] * 8
