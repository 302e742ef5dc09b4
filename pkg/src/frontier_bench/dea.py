"""First-stage efficiency scores from the DEA envelopment program."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataframe import Dataset
from .errors import DataError, InfeasibleError, LpError
from .lp import OPTIMAL, LpProblem, lp_solve

FRONTIER_TOL = 1e-9
PEER_TOL = 1e-9


@dataclass(frozen=True)
class DeaModelSpec:
    name: str
    inputs: tuple
    outputs: tuple
    returns_to_scale: str = "CRS"
    orientation: str = "input"
    excluded_dmus: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "excluded_dmus", tuple(self.excluded_dmus))
        rts = self.returns_to_scale.upper()
        object.__setattr__(self, "returns_to_scale", rts)
        if not self.inputs or not self.outputs:
            raise DataError(f"DEA model {self.name!r}: inputs and outputs must be non-empty")
        if set(self.inputs) & set(self.outputs):
            raise DataError(f"DEA model {self.name!r}: inputs and outputs overlap")
        if rts not in ("CRS", "VRS"):
            raise DataError(f"DEA model {self.name!r}: returns_to_scale must be CRS or VRS")
        if self.orientation not in ("input", "output"):
            raise DataError(f"DEA model {self.name!r}: orientation must be 'input' or 'output'")

    @classmethod
    def from_dict(cls, obj: Mapping) -> "DeaModelSpec":
        return cls(
            name=str(obj["name"]),
            inputs=list(obj["inputs"]),
            outputs=list(obj["outputs"]),
            returns_to_scale=str(obj.get("rts", "CRS")),
            orientation=str(obj.get("orientation", "input")),
            excluded_dmus=list(obj.get("exclude", [])),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "rts": self.returns_to_scale,
            "orientation": self.orientation,
            "exclude": list(self.excluded_dmus),
        }


@dataclass(frozen=True)
class EfficiencyScore:
    dmu_id: str
    score: float
    reference_set: tuple = ()

    def to_dict(self) -> dict:
        return {
            "dmu_id": self.dmu_id,
            "score": self.score,
            "reference_set": [[peer, w] for peer, w in self.reference_set],
        }


def envelopment_lp(X: np.ndarray, Y: np.ndarray, o: int, rts: str = "CRS",
                   orientation: str = "input") -> LpProblem:
    """Build the envelopment program for unit ``o``.

    Variables are ``[theta, lambda_1 .. lambda_n]`` (``phi`` instead of
    ``theta`` for output orientation). ``X`` is ``(n, m)`` inputs, ``Y`` is
    ``(n, s)`` outputs.
    """
    n = X.shape[0]
    rows, senses, rhs = [], [], []
    if orientation == "input":
        for i in range(X.shape[1]):
            rows.append(np.concatenate([[-X[o, i]], X[:, i]]))
            senses.append("<=")
            rhs.append(0.0)
        for r in range(Y.shape[1]):
            rows.append(np.concatenate([[0.0], Y[:, r]]))
            senses.append(">=")
            rhs.append(Y[o, r])
    else:
        for i in range(X.shape[1]):
            rows.append(np.concatenate([[0.0], X[:, i]]))
            senses.append("<=")
            rhs.append(X[o, i])
        for r in range(Y.shape[1]):
            rows.append(np.concatenate([[-Y[o, r]], Y[:, r]]))
            senses.append(">=")
            rhs.append(0.0)
    if rts == "VRS":
        rows.append(np.concatenate([[0.0], np.ones(n)]))
        senses.append("=")
        rhs.append(1.0)
    c = np.zeros(n + 1)
    c[0] = 1.0
    return LpProblem(c, np.array(rows), senses, np.array(rhs), maximize=orientation == "output")


def solve_envelopment(spec: DeaModelSpec, ds: Dataset) -> list[EfficiencyScore]:
    """Score every retained DMU of ``ds`` under ``spec``.

    Input orientation reports ``theta``; output orientation reports ``1/phi``
    so that scores always lie in (0, 1]. Scores within ``1e-9`` of one are
    snapped to exactly 1.
    """
    unknown = [d for d in spec.excluded_dmus if d not in ds.dmu_ids]
    if unknown:
        raise DataError(f"DEA model {spec.name!r}: unknown excluded dmu_id(s) {unknown}")
    ids = [d for d in ds.dmu_ids if d not in set(spec.excluded_dmus)]
    if not ids:
        raise DataError(f"DEA model {spec.name!r}: no DMUs left after exclusions")
    sub = ds.select_rows(ids)
    X = sub.matrix(spec.inputs)
    Y = sub.matrix(spec.outputs)
    for names, M in ((spec.inputs, X), (spec.outputs, Y)):
        bad = np.argwhere(M <= 0)
        if bad.size:
            r, c = bad[0]
            raise DataError(f"DEA model {spec.name!r}: {names[c]} of {ids[r]!r} is not strictly positive")
    # column scaling leaves scores and intensities unchanged, improves conditioning
    X = X / X.mean(axis=0)
    Y = Y / Y.mean(axis=0)

    scores = []
    for o, dmu in enumerate(ids):
        lp = envelopment_lp(X, Y, o, spec.returns_to_scale, spec.orientation)
        try:
            sol = lp_solve(lp)
        except LpError as exc:
            raise InfeasibleError(f"DEA model {spec.name!r}: LP failed for {dmu!r}: {exc}", dmu) from exc
        if sol.status != OPTIMAL:
            raise InfeasibleError(f"DEA model {spec.name!r}: LP {sol.status} for {dmu!r}", dmu)
        value = sol.x[0]
        score = value if spec.orientation == "input" else 1.0 / value
        if score >= 1.0 - FRONTIER_TOL:
            score = 1.0
        lam = sol.x[1:]
        peers = tuple((ids[j], float(lam[j])) for j in np.flatnonzero(lam > PEER_TOL))
        scores.append(EfficiencyScore(dmu, float(score), peers))
    return scores


def write_scores_csv(scores: Sequence[EfficiencyScore], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dmu_id", "score"])
        for s in scores:
            writer.writerow([s.dmu_id, format(s.score, ".17g")])
