"""Classical k-SAT core: formulas, DIMACS I/O, brute-force oracle, random
instance generation, and a Schoening-style local-search baseline.

Boolean convention used throughout the package: a variable that is *true*
is written as bit ``0`` in bitstrings (and maps to spin ``+1`` on the
quantum side); *false* is bit ``1`` (spin ``-1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

Assignment = tuple[bool, ...]


class SatError(ValueError):
    """Raised for malformed formulas or DIMACS input."""


@dataclass(frozen=True)
class Literal:
    """A possibly-negated variable; variables are 1-based as in DIMACS."""

    variable: int
    negated: bool = False

    def __post_init__(self) -> None:
        if self.variable < 1:
            raise SatError(f"variable index must be >= 1, got {self.variable}")

    def to_dimacs(self) -> int:
        return -self.variable if self.negated else self.variable

    @property
    def sign(self) -> int:
        """+1 for a positive literal, -1 for a negated one."""
        return -1 if self.negated else 1


Clause = tuple[Literal, ...]


@dataclass(frozen=True)
class CnfFormula:
    """A CNF formula with uniform clause width k over ``num_vars`` variables."""

    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        if self.num_vars < 1:
            raise SatError("formula needs at least one variable")
        if len(self.clauses) < 1:
            raise SatError("formula needs at least one clause")
        k = len(self.clauses[0])
        for i, clause in enumerate(self.clauses):
            if len(clause) != k:
                raise SatError(f"clause {i + 1} has width {len(clause)}, expected {k}")
            if len(clause) == 0:
                raise SatError(f"clause {i + 1} is empty")
            seen = set()
            for lit in clause:
                if lit.variable > self.num_vars:
                    raise SatError(
                        f"clause {i + 1} references variable {lit.variable} > {self.num_vars}"
                    )
                if lit.variable in seen:
                    raise SatError(f"clause {i + 1} repeats variable {lit.variable}")
                seen.add(lit.variable)

    @property
    def k(self) -> int:
        return len(self.clauses[0])

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def alpha(self) -> float:
        """Clause density m/n."""
        return self.num_clauses / self.num_vars


@dataclass(frozen=True)
class SolutionSet:
    """All satisfying assignments of a formula, from the brute-force oracle."""

    assignments: tuple[Assignment, ...]

    @property
    def count(self) -> int:
        return len(self.assignments)


def clause(*lits: int) -> Clause:
    """Build a clause from signed DIMACS-style integers, e.g. clause(1, -2)."""
    return tuple(Literal(abs(v), v < 0) for v in lits)


def formula(num_vars: int, *clauses_: Iterable[int]) -> CnfFormula:
    return CnfFormula(num_vars, tuple(clause(*c) for c in clauses_))


def to_bitstring(assignment: Sequence[bool]) -> str:
    """Render an assignment as a bitstring with true -> '0', false -> '1'."""
    return "".join("0" if b else "1" for b in assignment)


def from_bitstring(bits: str) -> Assignment:
    return tuple(c == "0" for c in bits)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF. Clauses are terminated by 0 and may span lines."""
    num_vars = None
    num_clauses = None
    clauses: list[Clause] = []
    pending: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise SatError(f"malformed DIMACS header: {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise SatError(f"malformed DIMACS header: {line!r}") from exc
            continue
        if num_vars is None:
            raise SatError("DIMACS clause before 'p cnf' header")
        for tok in line.split():
            v = int(tok)
            if v == 0:
                if not pending:
                    raise SatError("zero-width clause in DIMACS input")
                clauses.append(clause(*pending))
                pending.clear()
            else:
                if abs(v) > num_vars:
                    raise SatError(f"literal {v} out of range (n={num_vars})")
                pending.append(v)
    if pending:
        raise SatError("unterminated clause at end of DIMACS input")
    if num_vars is None or num_clauses is None:
        raise SatError("missing 'p cnf' header")
    if len(clauses) != num_clauses:
        raise SatError(f"declared {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses))


def write_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.num_vars} {f.num_clauses}"]
    for cl in f.clauses:
        lines.append(" ".join(str(lit.to_dimacs()) for lit in cl) + " 0")
    return "\n".join(lines) + "\n"


def evaluate(f: CnfFormula, assignment: Sequence[bool]) -> bool:
    """True iff every clause has at least one satisfied literal."""
    if len(assignment) != f.num_vars:
        raise SatError(
            f"assignment has {len(assignment)} bits, formula has {f.num_vars} variables"
        )
    for cl in f.clauses:
        if not any(assignment[lit.variable - 1] != lit.negated for lit in cl):
            return False
    return True


_ENUM_CAP = 24


def _assignment_table(n: int, offset: int, count: int) -> np.ndarray:
    """Boolean table (count, n): row i is assignment offset+i, variable 1 first.

    Bit convention: variable j is true iff bit (n-j) of the row index is set,
    so row index 0 is the all-false assignment.
    """
    idx = np.arange(offset, offset + count, dtype=np.int64)
    shifts = n - 1 - np.arange(n)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(bool)


def _satisfied_mask(f: CnfFormula, table: np.ndarray) -> np.ndarray:
    ok = np.ones(table.shape[0], dtype=bool)
    for cl in f.clauses:
        cols = np.array([lit.variable - 1 for lit in cl])
        negs = np.array([lit.negated for lit in cl])
        ok &= (table[:, cols] != negs[None, :]).any(axis=1)
    return ok


def enumerate_solutions(f: CnfFormula, max_vars: int = _ENUM_CAP) -> SolutionSet:
    """Brute-force oracle over all 2^n assignments (guarded by max_vars)."""
    n = f.num_vars
    if n > max_vars:
        raise SatError(f"refusing brute force for n={n} > {max_vars}")
    sols: list[Assignment] = []
    chunk = 1 << min(n, 16)
    for offset in range(0, 1 << n, chunk):
        table = _assignment_table(n, offset, min(chunk, (1 << n) - offset))
        for row in table[_satisfied_mask(f, table)]:
            sols.append(tuple(bool(b) for b in row))
    return SolutionSet(tuple(sols))


def is_satisfiable(f: CnfFormula, max_vars: int = _ENUM_CAP) -> bool:
    n = f.num_vars
    if n > max_vars:
        raise SatError(f"refusing brute force for n={n} > {max_vars}")
    chunk = 1 << min(n, 16)
    for offset in range(0, 1 << n, chunk):
        table = _assignment_table(n, offset, min(chunk, (1 << n) - offset))
        if _satisfied_mask(f, table).any():
            return True
    return False


def num_clauses_for(n: int, alpha: float) -> int:
    """m = round(alpha * n), rounding half up."""
    return int(math.floor(alpha * n + 0.5))


def random_instance(
    n: int, alpha: float, k: int, rng: np.random.Generator
) -> CnfFormula:
    """Uniform random k-SAT: k distinct variables per clause, signs fair coins.

    Duplicate clauses are allowed; duplicate variables within a clause are not.
    """
    if k > n:
        raise SatError(f"clause width k={k} exceeds n={n}")
    m = num_clauses_for(n, alpha)
    if m < 1:
        raise SatError(f"alpha={alpha} gives zero clauses for n={n}")
    clauses = []
    for _ in range(m):
        variables = rng.choice(n, size=k, replace=False) + 1
        negs = rng.random(k) < 0.5
        clauses.append(tuple(Literal(int(v), bool(neg)) for v, neg in zip(variables, negs)))
    return CnfFormula(n, tuple(clauses))


def random_unique_solution_instance(
    n: int,
    alpha: float,
    k: int,
    rng: np.random.Generator,
    max_attempts: int = 10**6,
) -> CnfFormula:
    """Rejection-sample random instances until exactly one solution exists."""
    for _ in range(max_attempts):
        f = random_instance(n, alpha, k, rng)
        if enumerate_solutions(f).count == 1:
            return f
    raise SatError(f"no unique-solution instance found in {max_attempts} attempts")


def schoening_solve(
    f: CnfFormula,
    rng: np.random.Generator,
    max_flips: Optional[int] = None,
    max_restarts: int = 100,
) -> Optional[Assignment]:
    """Schoening's random walk: random start, then repeatedly pick an
    unsatisfied clause and flip one of its variables at random. Returns a
    verified satisfying assignment, or None if the budget is exhausted.
    """
    n = f.num_vars
    flips = max_flips if max_flips is not None else 3 * n
    for _ in range(max_restarts):
        bits = list(rng.random(n) < 0.5)
        for _ in range(flips + 1):
            unsat = [cl for cl in f.clauses
                     if not any(bits[l.variable - 1] != l.negated for l in cl)]
            if not unsat:
                return tuple(bits)
            cl = unsat[rng.integers(len(unsat))]
            lit = cl[rng.integers(len(cl))]
            bits[lit.variable - 1] = not bits[lit.variable - 1]
    return None


# Worked 2-qubit 2-SAT problems used across tests and docs: the
# unique-solution triple, the two-solution pair, and the unsatisfiable quad.
TWO_SAT_UNIQUE = formula(2, (1, 2), (1, -2), (-1, -2))
TWO_SAT_TWO_SOLUTIONS = formula(2, (1, 2), (-1, -2))
TWO_SAT_UNSAT = formula(2, (1, 2), (1, -2), (-1, -2), (-1, 2))
