import json

import pytest

from conftest import suite_report
from ospyangian.gauss import psi_embed
from ospyangian.ncseries import BivarSeries, Engine, Mutation
from ospyangian.relcheck import (SUITES, Checker, EngineModel, bivar_restrict, center_product, cleared_rows,
                                 mutation_controls, rep_sign_flip_control, suite_applicable, suite_center)
from ospyangian.superspace import make_space


def test_cleared_rows_cover_level_budget():
    rows = list(cleared_rows(6, 3))
    assert (-2, -2) in rows and (1, 1) in rows
    assert all((r + 2) + (s + 2) <= 6 and max(r, s) <= 1 for r, s in rows)
    assert len(rows) == 16


def test_report_schema_and_failure_capture():
    model = EngineModel(make_space(3, 1), 2)
    ch = Checker("demo", model)
    e = model.engine
    assert ch.zero("ok", [1], e.zero())
    assert not ch.zero("bad", [(1, 2), "x"], e.gen(1, 2, 1))
    rep = ch.finish()
    d = rep.to_dict()
    assert set(d) == {"suite", "N", "m", "K", "status", "instances_checked", "failures", "millis", "stats"}
    assert d["status"] == "fail" and d["instances_checked"] == 2 and d["millis"] is None
    assert d["failures"] == [{"relation": "bad", "indices": [[1, 2], "x"], "residual_terms": ["(1)*t[1,2](1)"]}]
    json.dumps(d)


def test_failure_list_is_capped():
    model = EngineModel(make_space(3, 1), 2)
    ch = Checker("demo", model, max_failures=3)
    for k in range(10):
        ch.truth("always", [k], False)
    rep = ch.finish()
    assert len(rep.failures) == 3 and rep.stats["failures_truncated"] == 10


def test_bivar_restrict():
    F = EngineModel(make_space(3, 1), 2).engine
    b = BivarSeries(F, 3, {(1, 1): F.one(), (2, 3): F.one()})
    assert bivar_restrict(b, 4).nonzero_keys() == [(1, 1)]


def test_embedding_needs_two_symplectic_pairs():
    assert not suite_applicable("embedding", make_space(3, 1))
    assert suite_applicable("embedding", make_space(3, 2))
    assert set(SUITES) >= {"rmatrix", "engine", "center", "gauss", "drinfeld_extended", "main_theorem", "evalrep"}


# -- spot instances from the algebra -------------------------------------------------


def test_center_product_first_factor():
    model = EngineModel(make_space(3, 1), 3)
    g = model.gauss
    c = model.c_series()
    assert center_product(model.space, g.h) == c


def test_h_spot_commutation():
    model = EngineModel(make_space(3, 1), 3)
    e, h = model.engine, model.gauss.h
    assert e.is_zero(e.bracket(h[0][1], h[0][2]))
    assert e.is_zero(e.bracket(h[0][1], h[4][2]))


def test_drinfeld_spot_instances():
    model = EngineModel(make_space(3, 1), 3)
    e, g = model.engine, model.gauss
    # [xi+_{1,0}, xi-_{1,0}] = kappa_{1,0}
    assert e.bracket(g.xi_plus[1][1], g.xi_minus[1][1]) == g.kappa_cur[1][1]
    model2 = EngineModel(make_space(3, 2), 3)
    e2, g2 = model2.engine, model2.gauss
    assert e2.is_zero(e2.bracket(g2.kappa_cur[1][1], g2.kappa_cur[2][2]))


def test_first_row_commutes_with_embedded_block():
    model = EngineModel(make_space(3, 2), 3)
    e = model.engine
    img = psi_embed(model.space, 1, model.T, 3)
    assert e.is_zero(e.bracket(e.gen(1, 1, 1), img[(2, 3)][2]))


# -- whole suites on the smallest case ----------------------------------------------------


@pytest.mark.parametrize("name", ["rmatrix", "engine", "center", "h_relations", "gauss", "drinfeld_extended",
                                  "main_theorem", "hopf_free"])
def test_suites_pass_small_case(name):
    rep = suite_report(name, 3, 1)
    assert rep.passed, rep.failures[:3]
    assert rep.instances_checked > 0


def test_suite_reports_are_reproducible():
    a = SUITES["gauss"](make_space(3, 1), 3, 42).to_dict()
    b = SUITES["gauss"](make_space(3, 1), 3, 42).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_mutated_center_fails():
    sp = make_space(3, 1)
    bad = EngineModel(sp, 3, Engine(sp, Mutation(theta_flip=1)))
    assert not suite_center(sp, 3, 42, model=bad).passed


def test_controls_are_detected():
    sp = make_space(3, 1)
    controls = mutation_controls(sp, 3, 42)
    assert [c["mutation"] for c in controls] == ["theta-flip@1", "kappa+1"]
    assert all(c["detected"] for c in controls)
    assert rep_sign_flip_control(sp)["detected"]
