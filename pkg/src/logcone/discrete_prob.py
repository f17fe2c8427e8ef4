"""Finite probability spaces, l-conditional expectations and l-martingales.

Sub-sigma-algebras of a finite space are exactly partitions of its atoms,
which makes every identity of the theory checkable without measure-theoretic
machinery.  The l-conditional expectation is exp(E[ln Y | G]); a positive
adapted process is an l-martingale precisely when its componentwise
logarithm is an ordinary martingale, and every l-submartingale factors as
X_n = Y_n * A_n with Y an l-martingale and A predictable, nondecreasing and
starting at one (the multiplicative Doob decomposition).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .cone_geometry import PositiveDomainError

# Probabilities must sum to one within this tolerance.
PROB_TOL = 1e-12

# Default relative tolerance for martingale classification; a process within
# tol of equality everywhere is a martingale, which takes precedence.
CLASSIFY_TOL = 1e-10

MARTINGALE = "martingale"
SUBMARTINGALE = "submartingale"
SUPERMARTINGALE = "supermartingale"
NONE = "none"


class NotAdaptedError(ValueError):
    """A process value is not measurable w.r.t. its filtration time."""


class NotSubmartingaleError(ValueError):
    """Doob decomposition requested for a process that is not an l-submartingale."""


class FiniteSpace:
    """A finite probability space given by its atom probabilities."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        arr = np.asarray(probs, dtype=float).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("probs must be a nonempty vector")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("atom probabilities must be strictly positive")
        if abs(arr.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"atom probabilities must sum to 1 within {PROB_TOL:g}")
        arr.flags.writeable = False
        self.probs = arr

    @property
    def num_atoms(self) -> int:
        return self.probs.size

    def __repr__(self) -> str:
        return f"FiniteSpace(m={self.num_atoms})"


class Partition:
    """A partition of atom indices; stands for a sub-sigma-algebra."""

    __slots__ = ("blocks", "num_atoms")

    def __init__(self, blocks):
        canon = tuple(tuple(sorted(int(i) for i in block)) for block in blocks)
        if not canon or any(len(b) == 0 for b in canon):
            raise ValueError("a partition needs nonempty blocks")
        flat = sorted(i for block in canon for i in block)
        m = len(flat)
        if flat != list(range(m)):
            raise ValueError("blocks must disjointly cover atoms 0..m-1")
        self.blocks = canon
        self.num_atoms = m

    @classmethod
    def trivial(cls, num_atoms: int) -> "Partition":
        return cls([tuple(range(num_atoms))])

    @classmethod
    def singletons(cls, num_atoms: int) -> "Partition":
        return cls([(i,) for i in range(num_atoms)])

    def refines(self, coarser: "Partition") -> bool:
        """True when every block of self lies inside a block of coarser."""
        if self.num_atoms != coarser.num_atoms:
            return False
        owner = {}
        for bi, block in enumerate(coarser.blocks):
            for atom in block:
                owner[atom] = bi
        return all(len({owner[a] for a in block}) == 1 for block in self.blocks)

    def __repr__(self) -> str:
        return f"Partition({list(map(list, self.blocks))!r})"


class RandomVariable:
    """A positive-vector-valued variable: one value per atom (m x n array)."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("values must be an m x n array")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise PositiveDomainError("random variable values must be strictly positive and finite")
        arr = arr.copy()
        arr.flags.writeable = False
        self.values = arr

    @property
    def num_atoms(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


class Filtration:
    """Nested partitions P_0, ..., P_T; P_{t+1} refines P_t."""

    __slots__ = ("partitions",)

    def __init__(self, partitions: Sequence[Partition]):
        parts = tuple(partitions)
        if not parts:
            raise ValueError("a filtration needs at least one partition")
        m = parts[0].num_atoms
        for t, part in enumerate(parts):
            if part.num_atoms != m:
                raise ValueError(f"partition {t} covers {part.num_atoms} atoms, expected {m}")
        for t in range(len(parts) - 1):
            if not parts[t + 1].refines(parts[t]):
                raise ValueError(f"partition {t + 1} does not refine partition {t}")
        self.partitions = parts

    @property
    def num_atoms(self) -> int:
        return self.partitions[0].num_atoms

    def __len__(self) -> int:
        return len(self.partitions)

    def __getitem__(self, t: int) -> Partition:
        return self.partitions[t]


class AdaptedProcess:
    """Time-indexed positive variables, each measurable w.r.t. its partition."""

    __slots__ = ("variables", "filtration")

    def __init__(self, variables: Sequence[RandomVariable], filtration: Filtration):
        var = tuple(variables)
        if len(var) != len(filtration):
            raise ValueError("need exactly one variable per filtration time")
        m = filtration.num_atoms
        n = var[0].dim
        for t, v in enumerate(var):
            if v.num_atoms != m or v.dim != n:
                raise ValueError(f"variable {t} has shape {v.values.shape}, expected ({m}, {n})")
            for block in filtration[t].blocks:
                idx = list(block)
                if not np.all(v.values[idx] == v.values[idx[0]]):
                    raise NotAdaptedError(
                        f"X_{t} is not constant on block {list(block)} of its partition"
                    )
        self.variables = var
        self.filtration = filtration

    @property
    def num_steps(self) -> int:
        return len(self.variables)

    @property
    def dim(self) -> int:
        return self.variables[0].dim


def _block_average(values: np.ndarray, partition: Partition, probs: np.ndarray) -> np.ndarray:
    """Probability-weighted mean over each block, replicated across its atoms."""
    out = np.empty_like(values)
    for block in partition.blocks:
        idx = list(block)
        w = probs[idx]
        out[idx] = (w / w.sum()) @ values[idx]
    return out


def _check_space(values_atoms: int, space: FiniteSpace, partition: Partition | None = None) -> None:
    if values_atoms != space.num_atoms:
        raise ValueError(f"variable defined on {values_atoms} atoms, space has {space.num_atoms}")
    if partition is not None and partition.num_atoms != space.num_atoms:
        raise ValueError("partition and space disagree on the number of atoms")


def cond_expectation(y: RandomVariable, g: Partition, space: FiniteSpace) -> RandomVariable:
    """Ordinary conditional expectation E[Y | G] on a finite space."""
    _check_space(y.num_atoms, space, g)
    return RandomVariable(_block_average(y.values, g, space.probs))


def l_cond_expectation(y: RandomVariable, g: Partition, space: FiniteSpace) -> RandomVariable:
    """Logarithmic conditional expectation exp(E[ln Y | G]).

    The unique G-measurable positive variable minimizing the log distance
    to Y, up to null sets (here: exactly, atoms all carry positive mass).
    """
    _check_space(y.num_atoms, space, g)
    return RandomVariable(np.exp(_block_average(np.log(y.values), g, space.probs)))


def l_distance(u: RandomVariable, v: RandomVariable, space: FiniteSpace) -> float:
    """Log distance between random variables: sqrt(E[ sum_i (ln U - ln V)^2 ])."""
    _check_space(u.num_atoms, space)
    if u.values.shape != v.values.shape:
        raise ValueError("random variables must share shape")
    diff = np.log(u.values) - np.log(v.values)
    return float(np.sqrt(np.sum(space.probs[:, None] * diff * diff)))


def verify_minimality(
    y: RandomVariable,
    g: Partition,
    space: FiniteSpace,
    trials: int,
    seed: int = 0,
) -> float:
    """Randomized dominance check of the l-conditional expectation.

    Draws G-measurable positive candidates at log-perturbation scales from
    1e-8 up to order one and returns the smallest observed value of
    d(Y, candidate)^2 - d(Y, X*)^2, which is nonnegative up to rounding.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x_star = l_cond_expectation(y, g, space)
    best_sq = l_distance(y, x_star, space) ** 2
    base_log = np.log(x_star.values)
    rng = np.random.default_rng(seed)
    min_slack = np.inf
    for _ in range(trials):
        scale = 10.0 ** rng.uniform(-8.0, 0.0)
        shifts = rng.normal(0.0, scale, size=(len(g.blocks), y.dim))
        cand_log = np.empty_like(base_log)
        for bi, block in enumerate(g.blocks):
            idx = list(block)
            cand_log[idx] = base_log[idx] + shifts[bi]
        candidate = RandomVariable(np.exp(cand_log))
        slack = l_distance(y, candidate, space) ** 2 - best_sq
        min_slack = min(min_slack, slack)
    return float(min_slack)


def _max_relative_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b) / np.abs(b)))


def tower_check(y: RandomVariable, g: Partition, h: Partition, space: FiniteSpace) -> float:
    """Max relative deviation of E_l[E_l[Y|G]|H] from E_l[Y|H]; H coarser than G."""
    if not g.refines(h):
        raise ValueError("h must be coarser than g (g must refine h)")
    inner = l_cond_expectation(y, g, space)
    lhs = l_cond_expectation(inner, h, space)
    rhs = l_cond_expectation(y, h, space)
    return _max_relative_deviation(lhs.values, rhs.values)


def multiplicative_check(
    ys: Sequence[RandomVariable],
    ws: Sequence[float],
    g: Partition,
    space: FiniteSpace,
) -> float:
    """Deviation between E_l[prod Y_i^w_i | G] and prod E_l[Y_i|G]^w_i."""
    if len(ys) != len(ws):
        raise ValueError("need one exponent per variable")
    if not ys:
        raise ValueError("need at least one variable")
    combined_log = np.zeros_like(ys[0].values, dtype=float)
    rhs_log = np.zeros_like(combined_log)
    for y, w in zip(ys, ws):
        combined_log = combined_log + w * np.log(y.values)
        rhs_log = rhs_log + w * np.log(l_cond_expectation(y, g, space).values)
    lhs = l_cond_expectation(RandomVariable(np.exp(combined_log)), g, space)
    return _max_relative_deviation(lhs.values, np.exp(rhs_log))


def independence_check(y: RandomVariable, g: Partition, space: FiniteSpace) -> float:
    """Deviation of E_l[Y|G] from the constant E_l[Y] (zero under independence)."""
    conditional = l_cond_expectation(y, g, space)
    constant = l_cond_expectation(y, Partition.trivial(space.num_atoms), space)
    return _max_relative_deviation(conditional.values, constant.values)


def product_space(
    probs_a, probs_b, values_b
) -> tuple[FiniteSpace, Partition, RandomVariable]:
    """Product construction making independence hold exactly.

    Atoms are pairs (i, j) in row-major order; the returned partition is
    generated by the first coordinate while the returned variable depends
    only on the second, so the two are independent by construction.
    """
    pa = np.asarray(probs_a, dtype=float)
    pb = np.asarray(probs_b, dtype=float)
    vb = np.asarray(values_b, dtype=float)
    if vb.ndim == 1:
        vb = vb[:, None]
    if vb.shape[0] != pb.size:
        raise ValueError("values_b must supply one value per second-coordinate atom")
    space = FiniteSpace(np.outer(pa, pb).ravel())
    nb = pb.size
    partition = Partition([tuple(range(i * nb, (i + 1) * nb)) for i in range(pa.size)])
    variable = RandomVariable(np.tile(vb, (pa.size, 1)))
    return space, partition, variable


def _classify_gaps(gaps: np.ndarray, tol: float) -> list[str]:
    """Componentwise labels from stacked deviation arrays (steps*atoms, n)."""
    labels = []
    for i in range(gaps.shape[1]):
        column = gaps[:, i]
        if column.size == 0 or np.max(np.abs(column)) <= tol:
            labels.append(MARTINGALE)
        elif np.min(column) >= -tol:
            labels.append(SUBMARTINGALE)
        elif np.max(column) <= tol:
            labels.append(SUPERMARTINGALE)
        else:
            labels.append(NONE)
    return labels


def _transition_gaps(p: AdaptedProcess, space: FiniteSpace, log_scale: bool) -> np.ndarray:
    _check_space(p.filtration.num_atoms, space)
    pieces = []
    for t in range(p.num_steps - 1):
        current = p.variables[t].values
        upcoming = p.variables[t + 1].values
        if log_scale:
            gap = _block_average(np.log(upcoming), p.filtration[t], space.probs) - np.log(current)
        else:
            gap = (_block_average(upcoming, p.filtration[t], space.probs) - current) / current
        pieces.append(gap)
    if not pieces:
        return np.empty((0, p.dim))
    return np.concatenate(pieces, axis=0)


def classify_l_martingale(p: AdaptedProcess, space: FiniteSpace, tol: float = CLASSIFY_TOL) -> list[str]:
    """Per-component l-martingale classification.

    Compares E_l[X_{n+1} | F_n] with X_n in relative terms; a component
    within tol of equality at every time and atom is a martingale, which
    takes precedence over the one-sided labels.
    """
    _check_space(p.filtration.num_atoms, space)
    pieces = []
    for t in range(p.num_steps - 1):
        current = p.variables[t].values
        predicted = l_cond_expectation(p.variables[t + 1], p.filtration[t], space).values
        pieces.append((predicted - current) / current)
    gaps = np.concatenate(pieces, axis=0) if pieces else np.empty((0, p.dim))
    return _classify_gaps(gaps, tol)


def classify_log_martingale(p: AdaptedProcess, space: FiniteSpace, tol: float = CLASSIFY_TOL) -> list[str]:
    """Classification of ln X_n as an ordinary martingale (the equivalent route)."""
    return _classify_gaps(_transition_gaps(p, space, log_scale=True), tol)


def classify_ordinary_martingale(p: AdaptedProcess, space: FiniteSpace, tol: float = CLASSIFY_TOL) -> list[str]:
    """Ordinary (arithmetic) martingale classification of the raw process."""
    return _classify_gaps(_transition_gaps(p, space, log_scale=False), tol)


def doob_decompose(
    p: AdaptedProcess, space: FiniteSpace, tol: float = CLASSIFY_TOL
) -> tuple[AdaptedProcess, AdaptedProcess]:
    """Multiplicative Doob decomposition X_n = Y_n * A_n of an l-submartingale.

    Runs the standard additive Doob recursion on ln X and exponentiates:
    Y is an l-martingale and A is predictable, componentwise nondecreasing,
    with A_0 = 1.  Raises :class:`NotSubmartingaleError` when some component
    of X is not an l-submartingale within tol.
    """
    labels = classify_l_martingale(p, space, tol)
    for i, label in enumerate(labels):
        if label not in (MARTINGALE, SUBMARTINGALE):
            raise NotSubmartingaleError(
                f"component {i} is classified {label!r}; Doob decomposition needs an l-submartingale"
            )
    logs = [np.log(v.values) for v in p.variables]
    compensator_log = [np.zeros_like(logs[0])]
    for t in range(1, p.num_steps):
        growth = _block_average(logs[t] - logs[t - 1], p.filtration[t - 1], space.probs)
        compensator_log.append(compensator_log[t - 1] + growth)
    martingale_part = AdaptedProcess(
        [RandomVariable(np.exp(logs[t] - compensator_log[t])) for t in range(p.num_steps)],
        p.filtration,
    )
    increasing_part = AdaptedProcess(
        [RandomVariable(np.exp(a)) for a in compensator_log],
        p.filtration,
    )
    return martingale_part, increasing_part
