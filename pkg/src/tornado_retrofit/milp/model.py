"""Solver-neutral mixed-integer linear model."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

import numpy as np

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
KINDS = ("continuous", "binary", "integer")
SENSES = ("<=", ">=", "=")


class ModelError(ValueError):
    pass


@dataclass
class Variable:
    name: str
    kind: str = "continuous"
    lb: float = 0.0
    ub: float = math.inf


@dataclass
class Constraint:
    name: str
    coeffs: dict[int, float]
    sense: str
    rhs: float


Terms = Union[Mapping[int, float], Iterable[tuple[int, float]]]


@dataclass
class MilpModel:
    """Variables, one linear objective and linear rows.

    Variables are referred to by the integer index returned from
    :meth:`add_var`. Names must be valid LP-format identifiers; they are
    checked on insertion so export never has to mangle them.
    """

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    objective_constant: float = 0.0
    maximize: bool = False
    _names: dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(self, name: str, kind: str = "continuous", lb: float = 0.0, ub: float = math.inf) -> int:
        if not NAME_RE.match(name):
            raise ModelError(f"invalid variable name {name!r}")
        if name in self._names:
            raise ModelError(f"duplicate variable name {name!r}")
        if kind not in KINDS:
            raise ModelError(f"unknown variable kind {kind!r}")
        if kind == "binary":
            lb, ub = max(0.0, float(lb)), min(1.0, float(ub))
        if math.isnan(lb) or math.isnan(ub) or lb > ub:
            raise ModelError(f"bad bounds [{lb}, {ub}] for {name!r}")
        self.variables.append(Variable(name, kind, float(lb), float(ub)))
        self._names[name] = len(self.variables) - 1
        return len(self.variables) - 1

    def index(self, name: str) -> int:
        return self._names[name]

    def _terms(self, terms: Terms) -> dict[int, float]:
        items = terms.items() if isinstance(terms, Mapping) else terms
        out: dict[int, float] = {}
        for j, a in items:
            j = int(j)
            if not 0 <= j < len(self.variables):
                raise ModelError(f"variable index {j} out of range")
            a = float(a)
            if not math.isfinite(a):
                raise ModelError(f"non-finite coefficient on {self.variables[j].name}")
            out[j] = out.get(j, 0.0) + a
        return out

    def add_constr(self, terms: Terms, sense: str, rhs: float, name: Optional[str] = None) -> int:
        if sense == "==":
            sense = "="
        if sense not in SENSES:
            raise ModelError(f"unknown constraint sense {sense!r}")
        if not math.isfinite(rhs):
            raise ModelError("constraint right-hand side must be finite")
        name = name or f"c{len(self.constraints)}"
        if not NAME_RE.match(name):
            raise ModelError(f"invalid constraint name {name!r}")
        self.constraints.append(Constraint(name, self._terms(terms), sense, float(rhs)))
        return len(self.constraints) - 1

    def set_objective(self, terms: Terms, maximize: bool = False, constant: float = 0.0) -> None:
        self.objective = self._terms(terms)
        self.maximize = bool(maximize)
        self.objective_constant = float(constant)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def integer_mask(self) -> np.ndarray:
        return np.array([v.kind != "continuous" for v in self.variables], dtype=bool)

    def validate(self) -> None:
        n = len(self.variables)
        for row in self.constraints:
            for j, a in row.coeffs.items():
                if not 0 <= j < n or not math.isfinite(a):
                    raise ModelError(f"constraint {row.name} has a bad term")
        for j in self.objective:
            if not 0 <= j < n:
                raise ModelError("objective references an unknown variable")

    def arrays(self):
        """Dense ``(c, A_ub, b_ub, A_eq, b_eq, lb, ub)`` with ``>=`` rows negated."""
        n = self.n_vars
        c = np.zeros(n)
        for j, a in self.objective.items():
            c[j] = a
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for row in self.constraints:
            a = np.zeros(n)
            for j, v in row.coeffs.items():
                a[j] = v
            if row.sense == "=":
                eq_rows.append(a)
                eq_rhs.append(row.rhs)
            elif row.sense == "<=":
                ub_rows.append(a)
                ub_rhs.append(row.rhs)
            else:
                ub_rows.append(-a)
                ub_rhs.append(-row.rhs)
        A_ub = np.array(ub_rows).reshape(-1, n)
        A_eq = np.array(eq_rows).reshape(-1, n)
        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        return c, A_ub, np.array(ub_rhs), A_eq, np.array(eq_rhs), lb, ub

    def evaluate(self, x) -> float:
        return math.fsum([self.objective_constant] + [a * float(x[j]) for j, a in self.objective.items()])

    def is_feasible(self, x, tol: float = 1e-6) -> bool:
        x = np.asarray(x, dtype=float)
        for j, v in enumerate(self.variables):
            if x[j] < v.lb - tol or x[j] > v.ub + tol:
                return False
            if v.kind != "continuous" and abs(x[j] - round(x[j])) > tol:
                return False
        for row in self.constraints:
            lhs = sum(a * x[j] for j, a in row.coeffs.items())
            scale = tol * max(1.0, abs(row.rhs))
            if row.sense == "<=" and lhs > row.rhs + scale:
                return False
            if row.sense == ">=" and lhs < row.rhs - scale:
                return False
            if row.sense == "=" and abs(lhs - row.rhs) > scale:
                return False
        return True
