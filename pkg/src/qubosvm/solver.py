"""QUBO solvers: exhaustive enumeration and simulated annealing.

Both return a SampleSet: distinct bit vectors sorted by ascending energy,
ties broken by lexicographic bit order. The annealer is a classical
single-flip Metropolis chain with a geometric temperature schedule; it
stands in for a quantum annealer and is fully deterministic given a seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import derive_seed
from .qubo import EXHAUSTIVE_GUARD, QuboProblem, _check_bits, qubo_energy

_CHUNK_BITS = 16  # enumerate at most 2**16 assignments per block


@dataclass(frozen=True)
class SolutionSample:
    """One sampled assignment and its energy."""

    bits: np.ndarray
    energy: float

    def __post_init__(self):
        vec = _check_bits(self.bits).astype(np.uint8)
        vec.setflags(write=False)
        object.__setattr__(self, "bits", vec)
        object.__setattr__(self, "energy", float(self.energy))

    def key(self) -> tuple:
        return (self.energy, tuple(self.bits))


@dataclass(frozen=True)
class SampleSet:
    """Deduplicated samples in (energy, lexicographic bits) order."""

    samples: tuple[SolutionSample, ...]

    def __post_init__(self):
        if not self.samples:
            raise ValueError("a sample set needs at least one sample")
        n = self.samples[0].bits.size
        if any(s.bits.size != n for s in self.samples):
            raise ValueError("samples have inconsistent lengths")
        keys = [s.key() for s in self.samples]
        if any(b >= a for a, b in zip(keys[1:], keys)):
            raise ValueError("samples must be strictly sorted by (energy, bits)")

    @classmethod
    def from_samples(cls, samples) -> "SampleSet":
        """Normalize: drop duplicate bit vectors, sort by (energy, bits)."""
        unique: dict[bytes, SolutionSample] = {}
        for s in samples:
            unique.setdefault(s.bits.tobytes(), s)
        ordered = sorted(unique.values(), key=SolutionSample.key)
        return cls(tuple(ordered))

    @property
    def best(self) -> SolutionSample:
        return self.samples[0]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i) -> SolutionSample:
        return self.samples[i]


@dataclass(frozen=True)
class AnnealSchedule:
    """Annealing parameters.

    ``initial_temperature=None`` resolves to the largest absolute QUBO
    coefficient (1.0 for an all-zero problem) and ``final_temperature=None``
    to 1e-3 times the initial temperature. The temperature of sweep t out of
    S is ``T0 * (Tf/T0) ** (t/S)``.
    """

    initial_temperature: float | None = None
    final_temperature: float | None = None
    sweeps: int = 1000
    num_reads: int = 64
    seed: int = 0

    def __post_init__(self):
        for name in ("initial_temperature", "final_temperature"):
            value = getattr(self, name)
            if value is not None and not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.num_reads < 1:
            raise ValueError(f"num_reads must be >= 1, got {self.num_reads}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    def resolve(self, problem: QuboProblem) -> tuple[float, float]:
        """Concrete (initial, final) temperatures for a problem."""
        t0 = self.initial_temperature
        if t0 is None:
            t0 = float(np.max(np.abs(problem.coeffs)))
            if t0 == 0.0:
                t0 = 1.0
        tf = self.final_temperature
        if tf is None:
            tf = 1e-3 * t0
        if not tf < t0:
            raise ValueError(
                f"final temperature {tf} must be below initial temperature {t0}"
            )
        return float(t0), float(tf)


def _chunk_energies(coeffs: np.ndarray, bits: np.ndarray) -> np.ndarray:
    # energy per row: sum_{i<=j} Q[i,j] x_i x_j, vectorized over rows
    return ((bits @ coeffs) * bits).sum(axis=1)


def solve_exhaustive(problem: QuboProblem, top_k: int = 1) -> SampleSet:
    """Enumerate every assignment and return the ``top_k`` lowest-energy ones.

    Guarded at 24 variables (the enumeration is blocked so memory stays
    bounded, but beyond 24 the runtime is unreasonable). Variable 0 is the
    most significant position of the enumeration index, so index order is
    exactly lexicographic bit order and ties resolve deterministically.
    """
    n = problem.num_vars
    if n > EXHAUSTIVE_GUARD:
        raise ValueError(
            f"exhaustive solver supports at most {EXHAUSTIVE_GUARD} variables, got {n}"
        )
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    total = 1 << n
    top_k = min(top_k, total)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)

    best: list[tuple[float, int]] = []  # (energy, assignment index)
    for lo in range(0, total, 1 << _CHUNK_BITS):
        hi = min(lo + (1 << _CHUNK_BITS), total)
        ids = np.arange(lo, hi, dtype=np.int64)
        bits = ((ids[:, None] >> shifts[None, :]) & 1).astype(float)
        energies = _chunk_energies(problem.coeffs, bits)
        order = np.lexsort((ids, energies))[:top_k]
        best.extend(zip(energies[order].tolist(), ids[order].tolist()))
        best.sort()
        del best[top_k:]

    samples = []
    for _, idx in best:
        vec = ((idx >> shifts) & 1).astype(np.uint8)
        samples.append(SolutionSample(vec, qubo_energy(problem, vec)))
    return SampleSet.from_samples(samples)


def incremental_energy_delta(problem: QuboProblem, bits, flip_index: int) -> float:
    """Energy change from flipping one bit, in O(num_vars) time.

    Uses only the coefficient row and column of the flipped variable:
    delta = (1 - 2*x_i) * (Q[i,i] + sum_{j<i} Q[j,i] x_j + sum_{j>i} Q[i,j] x_j).
    """
    vec = _check_bits(bits)
    n = problem.num_vars
    if vec.size != n:
        raise ValueError(f"expected {n} bits, got {vec.size}")
    if not (0 <= flip_index < n):
        raise ValueError(f"flip index {flip_index} out of range for {n} variables")
    q = problem.coeffs
    x = vec.astype(float)
    field = q[flip_index, flip_index]
    field += q[:flip_index, flip_index] @ x[:flip_index]
    field += q[flip_index, flip_index + 1 :] @ x[flip_index + 1 :]
    return float((1.0 - 2.0 * x[flip_index]) * field)


def solve_anneal(
    problem: QuboProblem, schedule: AnnealSchedule | None = None, top_k: int = 1
) -> SampleSet:
    """Simulated annealing with ``num_reads`` independent restarts.

    Each read starts from its own uniformly random assignment and performs
    ``sweeps`` full passes over the variables; within a sweep every variable
    is proposed for a single-bit flip and accepted by the Metropolis rule at
    the sweep's temperature. The best state each read visits (including its
    starting state) is collected, and the distinct results are returned as a
    SampleSet truncated to ``top_k``.

    Read r consumes only its own generator, seeded from ``schedule.seed``
    and r, so results do not depend on how reads are scheduled; the lockstep
    vectorization below is exactly equivalent to running reads one by one.
    """
    if schedule is None:
        schedule = AnnealSchedule()
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    t0, tf = schedule.resolve(problem)
    n = problem.num_vars
    reads = schedule.num_reads
    sweeps = schedule.sweeps

    upper = np.triu(problem.coeffs, 1)
    mirrored = upper + upper.T  # row i: every neighbor coefficient of variable i
    diag = np.diag(problem.coeffs).copy()

    gens = [
        np.random.default_rng(derive_seed(schedule.seed, r)) for r in range(reads)
    ]
    bits = np.stack([g.integers(0, 2, size=n) for g in gens]).astype(float)
    energies = _chunk_energies(problem.coeffs, bits)
    best_bits = bits.copy()
    best_energies = energies.copy()

    temperatures = t0 * (tf / t0) ** (np.arange(sweeps) / sweeps)
    for t in range(sweeps):
        temp = temperatures[t]
        rand = np.stack([g.random(n) for g in gens])
        for i in range(n):
            column = bits @ mirrored[:, i] + diag[i]
            delta = (1.0 - 2.0 * bits[:, i]) * column
            # exponent clipped at 0 so downhill moves always pass (rand < 1)
            accept = rand[:, i] < np.exp(np.minimum(-delta, 0.0) / temp)
            bits[accept, i] = 1.0 - bits[accept, i]
            energies = np.where(accept, energies + delta, energies)
            improved = energies < best_energies
            if improved.any():
                best_energies = np.where(improved, energies, best_energies)
                best_bits[improved] = bits[improved]

    samples = []
    for r in range(reads):
        vec = best_bits[r].astype(np.uint8)
        samples.append(SolutionSample(vec, qubo_energy(problem, vec)))
    result = SampleSet.from_samples(samples)
    return SampleSet(result.samples[:top_k])
