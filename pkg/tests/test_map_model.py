"""Map construction, config validation, one-sided jets, benchmark families."""

import copy
import math

import numpy as np
import pytest

from cusp_induce import expr as ex
from cusp_induce import map_model as mm


def test_chebyshev_structure(cheb):
    assert (cheb.lo, cheb.hi) == (-1.0, 1.0)
    assert len(cheb.branches) == 2
    assert len(cheb.critical_points) == 2
    assert all(cp.location == 0.0 for cp in cheb.critical_points)
    assert {cp.side for cp in cheb.critical_points} == {"-", "+"}
    assert all(cp.order == 2.0 for cp in cheb.critical_points)
    assert all(cp.kind == "critical" for cp in cheb.critical_points)


def test_lorenz_structure(lorenz):
    assert (lorenz.lo, lorenz.hi) == (-1.0, 1.0)
    assert len(lorenz.branches) == 2
    # order s < 1: unbounded one-sided derivative
    assert all(cp.order < 1.0 for cp in lorenz.critical_points)
    assert all(cp.kind == "singular" for cp in lorenz.critical_points)


def test_singular_unimodal_structure(singular):
    assert len(singular.branches) == 4
    assert len(singular.critical_points) == 6
    kinds = {cp.kind for cp in singular.critical_points}
    assert kinds == {"critical", "singular"}


def test_unknown_config_key_rejected():
    cfg = mm.family_config("chebyshev")
    cfg["bogus"] = 1
    with pytest.raises(mm.MapConfigError):
        mm.build_map(cfg)


def test_branch_gap_rejected():
    cfg = mm.family_config("chebyshev")
    cfg["branches"][0]["interval"] = [-1.0, -0.1]
    with pytest.raises(mm.MapValidationError):
        mm.build_map(cfg)


def test_branch_overlap_rejected():
    cfg = mm.family_config("chebyshev")
    cfg["branches"][1]["interval"] = [-0.2, 1.0]
    with pytest.raises(mm.MapValidationError):
        mm.build_map(cfg)


def test_undeclared_interior_boundary_rejected():
    cfg = mm.family_config("chebyshev")
    cfg["critical_points"] = []
    with pytest.raises(mm.MapValidationError):
        mm.build_map(cfg)


def test_image_escaping_domain_rejected():
    cfg = mm.family_config("chebyshev")
    cfg["branches"][0]["expr"] = "x^2 - x^3"
    with pytest.raises(mm.MapValidationError):
        mm.build_map(cfg)


def test_unknown_family_rejected():
    with pytest.raises(mm.MapConfigError):
        mm.family_config("nosuch")


def test_evaluate_interior_and_boundary(cheb):
    assert mm.evaluate(cheb, 0.5).value == pytest.approx(0.5)
    assert mm.evaluate(cheb, 0.5).d1 == pytest.approx(-2.0)
    # branch boundaries require an explicit side
    with pytest.raises(ex.EvalDomainError):
        mm.evaluate(cheb, 0.0)
    left = mm.evaluate(cheb, 0.0, "-")
    right = mm.evaluate(cheb, 0.0, "+")
    assert left.value == right.value == 1.0
    assert left.d1 == right.d1 == 0.0


def test_endpoint_jet_keeps_exact_value_at_kink(cheb):
    j = cheb.endpoint_jet(1, 0.0, "+")
    assert j.value == 1.0
    assert j.d1 == 0.0
    assert j.d2 == pytest.approx(-4.0, rel=1e-6)


def test_endpoint_jet_one_sided_blowup(lorenz):
    j = lorenz.endpoint_jet(1, 0.0, "+")
    assert j.value == -1.0
    assert math.isinf(j.d1) and j.d1 > 0


def test_critical_distance(cheb, singular):
    assert mm.critical_distance(cheb, 0.3) == pytest.approx(0.3)
    assert mm.critical_distance(cheb, -0.2) == pytest.approx(0.2)
    # nearest of several declared locations
    locs = singular.critical_locations
    x = 0.9 * singular.hi
    expected = min(abs(x - c) for c in locs)
    assert mm.critical_distance(singular, x) == pytest.approx(expected)


def test_branch_index_and_images(cheb):
    assert cheb.branch_index(-0.5) == 0
    assert cheb.branch_index(0.5) == 1
    for lo, hi in cheb.branch_images:
        assert cheb.lo <= lo < hi <= cheb.hi


def test_monotone_signs(cheb, lorenz):
    assert cheb.monotone_signs == (1, -1)
    assert lorenz.monotone_signs == (1, 1)


def test_nondegeneracy_passes_on_all_families(cheb, lorenz, unimodal2, singular):
    for m in (cheb, lorenz, unimodal2, singular):
        rep = mm.verify_nondegeneracy(m)
        assert rep.passed, rep.failures


def test_branch_vectorized_values_match_scalar(cheb):
    br = cheb.branches[1]
    xs = np.linspace(0.05, 0.95, 41)
    vals = br.values(xs)
    d1s = br.d1_values(xs)
    for x, v, d in zip(xs, vals, d1s):
        j = br.jet(float(x))
        assert v == pytest.approx(j.value, rel=1e-14)
        assert d == pytest.approx(j.d1, rel=1e-14)


def test_load_map_round_trip(tmp_path, cheb):
    import json

    path = tmp_path / "map.json"
    path.write_text(json.dumps(mm.family_config("chebyshev")))
    m = mm.load_map(str(path))
    assert len(m.branches) == len(cheb.branches)
    assert mm.evaluate(m, 0.25).value == mm.evaluate(cheb, 0.25).value
