"""3-SAT to flat-loss regression reduction.

Each variable v_i appearing in Gamma_i clause slots contributes Gamma_i rows
penalizing M(x_i) and Gamma_i rows penalizing M(x_i - 10 tau), so any x pays
at least C = M(tau-saturated) per slot and pays exactly that only when x_i
sits near 0 or 10 tau.  Each clause contributes three rows whose residuals
are a+b+c - 10 tau, a+b+c - 20 tau, a+b+c - 30 tau, where a literal reads
x_i when positive and 10 tau - x_i when negated; with s in {1,2,3} satisfied
literals exactly one row is at its zero.  A satisfiable formula with m
clauses therefore has minimum cost exactly 5*C*m (3Cm from variables, 2Cm
from clauses), and near-optimal solutions round to near-satisfying
assignments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError
from .loss import LossSpec


@dataclass(frozen=True)
class CnfFormula:
    """3-CNF with DIMACS-style signed literals (variables are 1-based)."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ParameterError("formula needs at least one variable")
        for clause in self.clauses:
            if len(clause) != 3:
                raise ParameterError("every clause must have exactly 3 literals")
            vars_seen = set()
            for lit in clause:
                v = abs(int(lit))
                if lit == 0 or v > self.num_vars:
                    raise ParameterError(f"literal {lit} out of range")
                vars_seen.add(v)
            if len(vars_seen) != 3:
                raise ParameterError(
                    "clause variables must be distinct (row entries are 0/+-1)")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> np.ndarray:
        """Clause-slot count per variable (1-based variables, index 0 unused)."""
        gamma = np.zeros(self.num_vars + 1, dtype=int)
        for clause in self.clauses:
            for lit in clause:
                gamma[abs(lit)] += 1
        return gamma


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF; clauses are 0-terminated and must have 3 literals."""
    num_vars = None
    declared = None
    literals: list[int] = []
    clauses: list[tuple[int, int, int]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParameterError(f"bad DIMACS header: {line!r}")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        for token in line.split():
            lit = int(token)
            if lit == 0:
                if len(literals) != 3:
                    raise ParameterError(
                        f"clause {literals} does not have exactly 3 literals")
                clauses.append(tuple(literals))
                literals = []
            else:
                literals.append(lit)
    if literals:
        raise ParameterError("trailing clause without 0 terminator")
    if num_vars is None:
        num_vars = max((abs(l) for cl in clauses for l in cl), default=1)
    if declared is not None and declared != len(clauses):
        raise ParameterError(
            f"header declares {declared} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses))


def random_planted_formula(num_vars: int, num_clauses: int, seed: int = 0):
    """Random 3-CNF guaranteed satisfiable by a planted assignment.

    Returns (formula, assignment) with assignment a 0/1 array of length
    num_vars.  Clauses pick 3 distinct variables and random polarities; if
    the planted assignment misses the clause, one literal is flipped.
    """
    if num_vars < 3:
        raise ParameterError("need at least 3 variables for 3-SAT")
    rng = np.random.default_rng(seed)
    assignment = rng.integers(0, 2, size=num_vars)
    clauses = []
    for _ in range(num_clauses):
        vars3 = rng.choice(num_vars, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3) * 2 - 1
        lits = [int(s * v) for s, v in zip(signs, vars3)]
        if not _clause_satisfied(lits, assignment):
            flip = rng.integers(0, 3)
            lits[flip] = -lits[flip]
        clauses.append(tuple(lits))
    return CnfFormula(num_vars, tuple(clauses)), assignment


def _clause_satisfied(lits, assignment) -> bool:
    return any((assignment[abs(l) - 1] == 1) == (l > 0) for l in lits)


def count_satisfied(formula: CnfFormula, assignment) -> int:
    a = np.asarray(assignment, dtype=int)
    if a.shape != (formula.num_vars,):
        raise ParameterError("assignment length must equal num_vars")
    return sum(_clause_satisfied(cl, a) for cl in formula.clauses)


def _check_loss(loss: LossSpec):
    # the reduction needs M(0)=0 and a constant value C on |a| >= tau that
    # also upper-bounds M below tau; both families here qualify
    if loss.value(0.0) != 0.0:
        raise ParameterError("reduction requires M(0) = 0")


def formula_to_instance(formula: CnfFormula, loss: LossSpec):
    """Emit (A, b, manifest): exactly 9m rows, entries in {0, +-1}.

    Part I rows come grouped by variable (Gamma_i rows targeting 0, then
    Gamma_i targeting 10 tau); Part II rows per clause target 10/20/30 tau.
    manifest records the flat value C and the satisfiable cost 5*C*m.
    """
    _check_loss(loss)
    tau = loss.tau
    gamma = formula.occurrences()
    m = formula.num_clauses
    rows = int(2 * gamma.sum() + 3 * m)  # = 9m

    data, row_idx, col_idx = [], [], []
    b = np.zeros(rows)
    r = 0
    for var in range(1, formula.num_vars + 1):
        for target in (0.0, 10.0 * tau):
            for _ in range(int(gamma[var])):
                data.append(1.0)
                row_idx.append(r)
                col_idx.append(var - 1)
                b[r] = target
                r += 1
    for clause in formula.clauses:
        negs = sum(1 for lit in clause if lit < 0)
        for k in (1, 2, 3):
            for lit in clause:
                data.append(1.0 if lit > 0 else -1.0)
                row_idx.append(r)
                col_idx.append(abs(lit) - 1)
            b[r] = (k - negs) * 10.0 * tau
            r += 1
    assert r == rows
    a = sp.csr_matrix((data, (row_idx, col_idx)),
                      shape=(rows, formula.num_vars))
    c_flat = loss.flat_value
    manifest = {
        "num_vars": formula.num_vars,
        "num_clauses": m,
        "rows": rows,
        "tau": tau,
        "p": loss.p,
        "kind": loss.kind,
        "flat_value": c_flat,
        "satisfiable_cost": 5.0 * c_flat * m,
    }
    return a, b, manifest


def assignment_to_point(assignment, tau: float) -> np.ndarray:
    """x with x_i = 10 tau for true variables, 0 for false."""
    return 10.0 * tau * np.asarray(assignment, dtype=float)


def point_to_assignment(x, tau: float) -> np.ndarray:
    """Round a solver output back to an assignment.

    Coordinates in [9 tau, 11 tau] read as true, in [-tau, tau] as false;
    anything else snaps to false (snapping never increases the objective).
    """
    xv = np.asarray(x, dtype=float)
    out = np.zeros(xv.size, dtype=int)
    out[(xv >= 9.0 * tau) & (xv <= 11.0 * tau)] = 1
    return out
