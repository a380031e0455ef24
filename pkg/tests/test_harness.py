import json
import math

import numpy as np
import pytest

from cornergb import catalog
from cornergb.errors import SceneError
from cornergb.harness import (LAW_TOLERANCES, conformal_law_check, convergence_sweep,
                              extended_mask, format_laws, format_sweep, identity_suite,
                              laws_passed, point_report, verify_gauss_bonnet)
from cornergb.scene import parse_scene

from conftest import GENERIC_OMEGA, GENERIC_SCENE

FOUR_PI_SQ = 4 * math.pi ** 2


@pytest.fixture(scope="module")
def bidisk():
    return catalog.flat_bidisk().scene


@pytest.fixture(scope="module")
def bidisk_report(bidisk):
    return verify_gauss_bonnet(bidisk, order=4)


def test_report_structure(bidisk_report):
    d = json.loads(bidisk_report.to_json())
    assert d["scene"] == "flat_bidisk" and d["chi"] == 1
    assert d["target"] == FOUR_PI_SQ
    assert set(d["pieces_a"]) == set(d["pieces_b"]) == {"interior", "M", "N", "corner"}
    assert d["passed"] and d["paths_agree"]
    assert d["error_estimate_a"] is not None and "timings" not in d
    assert d["nodes"]["corner"] == 1   # both angles are constant axes


def test_report_text(bidisk_report):
    text = bidisk_report.to_text()
    assert "result           PASS" in text
    assert "path difference" in text and "pfaffian - integrand" in text


def test_reports_are_byte_identical(bidisk, bidisk_report):
    again = verify_gauss_bonnet(bidisk, order=4)
    threaded = verify_gauss_bonnet(bidisk, order=4, workers=3)
    assert again.to_json() == bidisk_report.to_json() == threaded.to_json()
    assert again.to_text() == bidisk_report.to_text()


def test_conformal_report_independent_of_workers():
    scene = catalog.conformal_variant(catalog.hemiball(), seed=1).scene
    a = verify_gauss_bonnet(scene, order=4, estimate_error=False)
    b = verify_gauss_bonnet(scene, order=4, estimate_error=False, workers=4)
    assert a.to_json() == b.to_json()
    assert a.omega is not None


def test_failing_tolerance(bidisk):
    r = verify_gauss_bonnet(bidisk, order=2, tol=1e-300, estimate_error=False)
    assert not r.passed and r.error_estimate_a is None
    assert "result           FAIL" in r.to_text()


def test_timings_are_opt_in(bidisk):
    r = verify_gauss_bonnet(bidisk, order=2, estimate_error=False, timings=True)
    assert set(r.timings) == {"interior", "M", "N", "corner", "total"}
    assert "timings" in r.to_dict()


def test_long_double_promotion_tightens_flat_interior(bidisk):
    loose = verify_gauss_bonnet(bidisk, order=8, roundoff_budget=None, estimate_error=False)
    tight = verify_gauss_bonnet(bidisk, order=8, tol=1e-8, estimate_error=False)
    assert loose.nodes["interior_extended"] == 0 < tight.nodes["interior_extended"]
    assert abs(tight.pieces_a["interior"]) < 1e-12
    assert abs(tight.pieces_a["interior"]) < abs(loose.pieces_a["interior"])


def test_extended_mask_meets_budget():
    est = np.array([5.0, 1.0, 3.0, 0.5, 0.25])
    # fewest nodes, largest first, leaving at most the budget behind
    mask = extended_mask(est, 1.0)
    assert mask.tolist() == [True, True, True, False, False]
    assert est[~mask].sum() <= 1.0 < est[~mask].sum() + est[mask].min()
    assert not extended_mask(est, 100.0).any()
    assert not extended_mask(est, None).any()


def test_bidisk_sweep_exact_from_order_two(bidisk):
    sweep = convergence_sweep(bidisk, [2, 4, 8])
    assert sweep["monotone"]
    assert sweep["rows"][0]["defect_a"] < 1e-8 and sweep["rows"][0]["defect_b"] < 1e-8
    assert "monotone beyond round-off floor: yes" in format_sweep(sweep)


def test_sweep_needs_two_orders(bidisk):
    with pytest.raises(ValueError, match="two orders"):
        convergence_sweep(bidisk, [4])


def test_hemiball_sweep():
    sweep = convergence_sweep(catalog.hemiball().scene, [8, 16, 32])
    assert sweep["monotone"], sweep["flags"]
    for row in sweep["rows"]:
        assert row["floor"] >= sweep["floor"]
        assert row["defect_a"] < 1e-6 and row["defect_b"] < 1e-6


@pytest.mark.slow
def test_conformal_bidisk_sweep():
    scene = catalog.conformal_variant(catalog.flat_bidisk(), seed=0).scene
    sweep = convergence_sweep(scene, [8, 16, 32])
    assert sweep["monotone"], sweep["flags"]
    defects = [r["defect_a"] for r in sweep["rows"]]
    assert defects[-1] < 1e-6


def test_identity_suite_on_generic_scene():
    scene = parse_scene(GENERIC_SCENE)
    res = identity_suite(scene, samples=30)
    assert all(st["count"] > 0 for st in res.values())
    assert all(st["max"] < 1e-9 for st in res.values()), res


def test_identity_suite_is_deterministic():
    scene = catalog.hemiball().scene
    assert identity_suite(scene, samples=10, seed=3) == identity_suite(scene, samples=10, seed=3)


def test_laws_with_zero_omega(bidisk):
    laws = conformal_law_check(bidisk, "0", samples=20)
    assert all(st["max"] < 1e-14 for st in laws.values()), laws


def test_laws_with_constant_omega():
    laws = conformal_law_check(catalog.hemiball().scene, "0.3", samples=20)
    assert laws_passed(laws)
    assert laws["corner: theta0~ - theta0"]["max"] < 1e-14


def test_laws_on_bidisk_periodic_factor(bidisk):
    laws = conformal_law_check(bidisk, "0.1*x1*x3*cos(x2)")
    assert set(laws) == set(LAW_TOLERANCES)
    assert all(st["max"] < 1e-8 for st in laws.values()), laws
    assert laws["corner: e^2w U~ - U - P2b w"]["count"] == 100


def test_laws_on_generic_scene():
    laws = conformal_law_check(parse_scene(GENERIC_SCENE), GENERIC_OMEGA, samples=30)
    assert laws_passed(laws), format_laws(laws)
    assert "FAIL" not in format_laws(laws)


def test_format_laws_marks_failures():
    laws = {"corner: G~ - e^-2w G": {"max": 1.0, "mean": 1.0, "count": 3}}
    assert "FAIL" in format_laws(laws) and not laws_passed(laws)


def test_point_report_strata(bidisk):
    inner = point_report(bidisk, [0.5, 1.0, 0.5, 2.0])
    assert inner["R"] == 0.0 and np.allclose(inner["g"], np.diag([1, 0.25, 1, 0.25]))
    face = point_report(bidisk, [1.0, 1.0, 0.5, 2.0], face=(0, "hi"))
    assert face["role"] == "M" and face["H"] == pytest.approx(1.0, rel=1e-13)
    corner = point_report(bidisk, [1.0, 1.0, 1.0, 2.0], corner=True)
    assert corner["U"] == pytest.approx(0.5, rel=1e-13)
    assert corner["theta0"] == pytest.approx(math.pi / 2, rel=1e-15)
    json.dumps(corner)


def test_point_report_errors(bidisk):
    with pytest.raises(SceneError, match="does not lie on an M-N corner"):
        point_report(bidisk, [0.5, 1.0, 1.0, 2.0], corner=True)
    with pytest.raises(SceneError, match="no chart named"):
        point_report(bidisk, [0.5, 1.0, 1.0, 2.0], chart="nope")
