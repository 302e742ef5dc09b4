import json
import re

import numpy as np
import pytest

from frontier_bench.dataframe import Dataset
from frontier_bench.regress import RegressionResult, RegressionSpec, Term, fit
from frontier_bench.report import (FOOTNOTE, UNICODE_MINUS, RenderSettings, coefficient_cell,
                                   fmt, render_comparison, render_result, render_table)
from frontier_bench.selection import compare_models

COMMA = RenderSettings(decimal_separator=",")


def gini_row_result(p=0.004):
    spec = RegressionSpec("DEA", ("GINI",))
    return RegressionResult(spec, (Term("INT", 1.2, 0.1, 0.0), Term("GINI", -3.069, 0.597, p)),
                            log_lik=39.02, aic=2 * 13 - 2 * 39.02, n=38, n_params=13,
                            adj_r2=0.612)


def test_table_cell_comma_mode_byte_exact():
    top, bottom = coefficient_cell(-3.069, 0.597, 0.004, COMMA)
    assert top.encode() == "−3,069".encode()
    assert bottom.encode() == "(0,597)***".encode()
    text = render_result(gini_row_result(), COMMA)
    lines = text.splitlines()
    i = next(k for k, ln in enumerate(lines) if ln.startswith("GINI"))
    assert lines[i].rstrip().endswith("−3,069")
    assert lines[i + 1].rstrip().endswith("(0,597)***")
    # coefficient and standard error share a right edge once padding is accounted for
    assert len(lines[i].rstrip()) + 3 == len(lines[i + 1].rstrip())


def test_dot_mode_and_explicit_minus():
    assert coefficient_cell(-3.069, 0.597, 0.004) == ("-3.069", "(0.597)***")
    s = RenderSettings(decimal_separator=",", minus_sign="-")
    assert fmt(-3.069, s) == "-3,069"
    assert fmt(-0.0001) == "0.000"
    assert fmt(float("nan")) == "" and fmt(None) == ""
    assert fmt(float("-inf"), COMMA) == UNICODE_MINUS + "inf"
    assert fmt(2.5, decimals=0) == "2"
    with pytest.raises(ValueError):
        RenderSettings(decimal_separator=";")


@pytest.mark.parametrize("p, mark", [(0.1, ""), (0.0999, "*"), (0.05, "*"), (0.0499, "**"),
                                     (0.01, "**"), (0.0099, "***")])
def test_star_boundaries_in_cells(p, mark):
    assert coefficient_cell(1.0, 0.5, p)[1] == "(0.500)" + mark


def test_akaike_footer_in_comma_mode():
    text = render_result(gini_row_result(), RenderSettings(decimals=2, decimal_separator=","))
    row = next(ln for ln in text.splitlines() if ln.startswith("Akaike"))
    assert row.split()[-1] == "−52,04"
    assert "Log-Lik." in text and FOOTNOTE in text


def test_render_is_deterministic():
    r = gini_row_result()
    assert render_table(r, COMMA) == render_table(r, COMMA)
    again = RegressionResult.from_dict(json.loads(json.dumps(r.to_dict())))
    assert render_table(again, COMMA) == render_table(r, COMMA)


def fitted_pair():
    rng = np.random.default_rng(0)
    n = 40
    x = rng.normal(size=(n, 2))
    y = np.clip(0.6 + x @ [0.05, -0.03] + rng.normal(0, 0.05, n), 0.05, 0.95)
    ds = Dataset(tuple(map(str, range(n))), {"y": y, "A": x[:, 0], "B": x[:, 1]})
    return (fit(RegressionSpec("y", ["A", "B"]), ds),
            fit(RegressionSpec("y", ["A"], method="Tobit", lower=0.0, upper=1.0), ds))


def test_comparison_render_and_lossless_numbers():
    ols, tob = fitted_pair()
    table = compare_models([("ols", ols), ("tobit", tob)])
    text = render_comparison(table)
    assert "OLS" in text and "Tobit" in text
    assert f"Lowest Akaike: {table.best_aic}" in text
    # every printed number equals the structured value rounded to the shown decimals
    shown = re.findall(r"-?\d+\.\d{3}", text)
    expected = []
    for r in (ols, tob):
        for t in r.terms:
            expected += [round(t.coef, 3), round(t.se, 3)]
        expected += [round(r.aic, 3), round(r.log_lik, 3)]
    expected.append(round(ols.adj_r2, 3))
    printed = sorted(float(s) for s in shown)
    assert printed == pytest.approx(sorted(expected), abs=5e-4 + 1e-12)
    b_row = next(ln for ln in text.splitlines() if ln.startswith("B "))
    assert len(b_row.split()) == 2   # absent from the Tobit column
