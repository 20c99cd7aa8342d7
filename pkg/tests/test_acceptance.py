"""Acceptance criteria: one PASS/FAIL line per criterion on the terminal."""
import pytest

from entanglement_ensembles import closedform as cf
from entanglement_ensembles import validation

SLOW = {4, 7, 9, 10}
EXPECTED_FAIL = {
    9: "hard-core boson deficits in band but not monotone in V for V <= 14",
}


def _params():
    for cid in sorted(validation.CRITERIA):
        marks = []
        if cid in SLOW:
            marks.append(pytest.mark.slow)
        if cid in EXPECTED_FAIL:
            marks.append(pytest.mark.xfail(reason=EXPECTED_FAIL[cid], strict=True))
        yield pytest.param(cid, marks=marks, id=f"criterion_{cid:02d}")


@pytest.mark.parametrize("cid", list(_params()))
def test_criterion(cid, capsys):
    result = validation.run_criterion(cid)
    with capsys.disabled():
        print(f"\n{result.line()}  ({result.seconds:.1f} s) {result.measured}")
    assert result.passed, result.measured


def test_tampered_closed_form_is_detected(monkeypatch):
    monkeypatch.setattr(cf, "page_average", lambda dA, dB: 0.0)
    assert validation.run_criterion(1).status == "fail"


def test_quick_suite_skips_slow_criteria():
    results = validation.run_suite("quick")
    assert [r.id for r in results] == sorted(validation.CRITERIA)
    assert {r.id for r in results if r.status == "skipped"} == set(validation.CRITERIA) - set(validation.QUICK_IDS)
