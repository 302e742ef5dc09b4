"""Fixed-width text rendering of regression tables and report sections.

All renderers are pure functions of their inputs and the :class:`RenderSettings`,
so the same structured report always renders to the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .regress import RegressionResult
from .selection import ComparisonTable, compare_models

UNICODE_MINUS = "−"
FOOTNOTE = "Standard errors in parentheses. * p<0.1, ** p<0.05, *** p<0.01"


@dataclass(frozen=True)
class RenderSettings:
    """Number formatting for text tables.

    ``minus_sign=None`` picks the typographic minus (U+2212) in comma-decimal
    mode, which mirrors printed tables, and an ASCII hyphen in dot mode.
    """

    decimals: int = 3
    decimal_separator: str = "."
    minus_sign: str | None = None

    def __post_init__(self):
        if self.decimal_separator not in (".", ","):
            raise ValueError("decimal_separator must be '.' or ','")
        if not 0 <= self.decimals <= 12:
            raise ValueError("decimals must be between 0 and 12")

    @property
    def minus(self) -> str:
        if self.minus_sign is not None:
            return self.minus_sign
        return UNICODE_MINUS if self.decimal_separator == "," else "-"

    @classmethod
    def from_dict(cls, obj: Mapping | None) -> "RenderSettings":
        obj = obj or {}
        return cls(int(obj.get("decimals", 3)), str(obj.get("decimal_separator", ".")),
                   obj.get("minus_sign"))


def fmt(value, settings: RenderSettings = RenderSettings(), decimals: int | None = None) -> str:
    """Format a number with fixed decimals; ``None``/NaN render empty, infinities as ``inf``."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, float) and math.isinf(value):
        return ("" if value > 0 else settings.minus) + "inf"
    d = settings.decimals if decimals is None else decimals
    text = f"{abs(value):.{d}f}"
    if settings.decimal_separator == ",":
        text = text.replace(".", ",")
    negative = value < 0 and any(ch not in "0.," for ch in text)
    return (settings.minus if negative else "") + text


def coefficient_cell(coef: float, se: float, p: float,
                     settings: RenderSettings = RenderSettings()) -> tuple[str, str]:
    """The two lines of a coefficient cell: ``"-3.069"`` and ``"(0.597)***"``."""
    from .regress import stars

    return fmt(coef, settings), f"({fmt(se, settings)}){stars(p)}"


def _grid(rows: Sequence[Sequence[str]], first_left=True) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for r in rows:
        cells = [r[0].ljust(widths[0]) if first_left else r[0].rjust(widths[0])]
        cells += [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out)


def _term_rows(results: Sequence[RegressionResult], terms: Sequence[str],
               settings: RenderSettings) -> list[list[str]]:
    rows = []
    for term in terms:
        top, bottom = [term], [""]
        for r in results:
            t = next((x for x in r.terms if x.name == term), None)
            if t is None:
                top.append("")
                bottom.append("")
                continue
            c, s = coefficient_cell(t.coef, t.se, t.p, settings)
            mark = t.stars
            top.append(c + " " * 3)
            bottom.append(s + " " * (3 - len(mark)))
        rows += [top, bottom]
    return rows


def _footer_rows(results: Sequence[RegressionResult], settings: RenderSettings) -> list[list[str]]:
    pad = " " * 3
    rows = [
        ["Adj. R²"] + [(fmt(r.adj_r2, settings) + pad) if r.adj_r2 is not None else "" for r in results],
        ["Akaike"] + [fmt(r.aic, settings) + pad for r in results],
        ["Log-Lik."] + [fmt(r.log_lik, settings) + pad for r in results],
        ["N"] + [str(r.n) + pad for r in results],
    ]
    return rows


def render_result(result: RegressionResult, settings: RenderSettings = RenderSettings(),
                  title: str | None = None) -> str:
    header = [["", "Coefficient" + " " * 3]]
    body = _term_rows([result], result.names, settings)
    rows = header + body + _footer_rows([result], settings)
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{result.method} regression of {result.spec.dependent}")
    lines.append(_grid(rows))
    lines.append(FOOTNOTE)
    return "\n".join(lines) + "\n"


def render_comparison(table: ComparisonTable, settings: RenderSettings = RenderSettings()) -> str:
    pad = " " * 3
    header = [[""] + [label + pad for label in table.labels],
              [""] + [r.method + pad for r in table.results]]
    rows = header + _term_rows(table.results, table.terms, settings)
    rows += _footer_rows(table.results, settings)
    lines = [_grid(rows), FOOTNOTE,
             f"Lowest Akaike: {table.best_aic}; highest Log-Lik.: {table.best_log_lik}"]
    return "\n".join(lines) + "\n"


def render_table(obj, settings: RenderSettings = RenderSettings()) -> str:
    """Render a :class:`RegressionResult` or a :class:`ComparisonTable` as fixed-width text."""
    if isinstance(obj, ComparisonTable):
        return render_comparison(obj, settings)
    return render_result(obj, settings)


def _section(title: str, body: str) -> str:
    return f"{title}\n{'=' * len(title)}\n{body.rstrip()}\n"


def render_report(report: Mapping, settings: RenderSettings | None = None) -> str:
    """Text view of a structured (JSON-ready) report dictionary."""
    if settings is None:
        settings = RenderSettings.from_dict(report.get("render"))
    parts = []
    meta = report["metadata"]
    parts.append(_section("Run", "\n".join(f"{k}: {meta[k]}" for k in sorted(meta))))

    stats = report.get("descriptive_stats")
    if stats:
        rows = [["Variable", "Min", "Median", "Max"]]
        rows += [[s["variable"], fmt(s["min"], settings), fmt(s["median"], settings),
                  fmt(s["max"], settings)] for s in stats]
        parts.append(_section("Descriptive statistics", _grid(rows)))

    g = report.get("gini")
    if g:
        rows = [["DMU", "GINI"]] + [[k, fmt(v, settings)] for k, v in g["values"].items()]
        body = f"periods per series: {g['periods']} (population convention, no small-sample correction)\n"
        parts.append(_section("Traffic variability (Gini)", body + _grid(rows)))

    for model in report.get("dea", []):
        if "error" in model:
            parts.append(_section(f"DEA {model['spec']['name']}", f"FAILED: {model['error']}"))
            continue
        spec = model["spec"]
        rows = [["DMU", "Score", "Peers"]]
        rows += [[s["dmu_id"], fmt(s["score"], settings),
                  " ".join(p for p, _ in s["reference_set"])] for s in model["scores"]]
        head = (f"inputs: {', '.join(spec['inputs'])}; outputs: {', '.join(spec['outputs'])}; "
                f"{spec['rts']}, {spec['orientation']}-oriented")
        if spec["exclude"]:
            head += f"; excluded: {', '.join(spec['exclude'])}"
        parts.append(_section(f"DEA {spec['name']}", head + "\n" + _grid(rows)))

    corr = report.get("correlation")
    if corr:
        rows = [["Pair", "r"]]
        rows += [[f"{a} / {b}", fmt(r, settings)] for a, b, r in corr["ranked_pairs"][:15]]
        parts.append(_section("Correlation (top pairs by |r|)", _grid(rows)))

    pca_d = report.get("pca")
    if pca_d:
        rows = [["Component", "Eigenvalue", "Share"]]
        rows += [[f"PC{i + 1}", fmt(ev, settings), fmt(sh, settings)]
                 for i, (ev, sh) in enumerate(zip(pca_d["eigenvalues"], pca_d["explained_share"]))]
        parts.append(_section("Principal components", f"retained: {pca_d['retained']}\n" + _grid(rows)))

    for reg in report.get("regressions", []):
        title = f"Regression {reg['label']}"
        if "error" in reg:
            parts.append(_section(title, f"FAILED: {reg['error']}"))
            continue
        body = render_result(RegressionResult.from_dict(reg["result"]), settings)
        trace = reg.get("reduction")
        if trace:
            lines = [f"backward elimination (p > {fmt(trace['threshold'], settings, 2)}): "
                     f"{len(trace['steps'])} step(s)"]
            for i, st in enumerate(trace["steps"], start=1):
                lines.append(f"  {i}. removed {st['removed']} (p = {fmt(st['p_value'], settings)}), "
                             f"Akaike {fmt(st['aic'], settings)}, Log-Lik. {fmt(st['log_lik'], settings)}")
            body = "\n".join(lines) + "\n" + body
        signs = reg.get("sign_check")
        if signs:
            mism = signs["mismatches"]
            body += "sign check: " + (f"unexpected sign for {', '.join(mism)}" if mism else "all signs as expected") + "\n"
        parts.append(_section(title, body))

    for run in report.get("staged", []):
        lines = []
        for st in run["stages"]:
            vifv = st["vif"]
            lines.append(f"{st['label']:<11} k={len(st['regressors']):>2}  "
                         f"Akaike {fmt(st['result']['aic'], settings)}  "
                         f"VIF flags: {', '.join(vifv['flagged']) or 'none'}")
        if run.get("error"):
            lines.append(f"FAILED: {run['error']}")
        lines += list(run.get("notes", []))
        parts.append(_section(f"Staged inclusion {run['label']}", "\n".join(lines)))

    comp = report.get("comparison")
    if comp:
        results = [(c["label"], RegressionResult.from_dict(c["result"])) for c in comp["results"]]
        parts.append(_section("Model comparison", render_comparison(compare_models(results), settings)))

    failures = report.get("failures")
    if failures:
        parts.append(_section("Failures", "\n".join(f"{f['analysis']}: {f['error']}" for f in failures)))
    return "\n".join(parts)
