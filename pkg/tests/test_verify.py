import pytest

from dcl.verify import SUITES, run_suite


@pytest.mark.parametrize("suite", SUITES)
def test_all_suites_pass(suite):
    checks = run_suite(suite, grids=(64, 128), seed=0)
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)


def test_unknown_suite_raises():
    with pytest.raises(KeyError):
        run_suite("spectra")


def test_check_lines_have_verdicts():
    for check in run_suite("projections", grids=(32,), seed=1):
        line = check.line()
        assert line.startswith(("PASS", "FAIL"))
        assert "value=" in line
