"""QUBO encoding of the kernel SVM dual problem.

The dual variables alpha_n are non-negative reals bounded by C. Each one is
expanded over ``bits_per_alpha`` binary digits weighted by powers of
``base``:

    alpha_n = sum_k base**k * bit[bits_per_alpha * n + k]

so the largest representable value C = sum_k base**k is also the box
constraint. Substituting the expansion into the dual objective (plus a
quadratic penalty that discourages violating the balance constraint
sum_n alpha_n * label_n = 0) yields an energy that is quadratic in the bits,
i.e. a QUBO. Minimizing the QUBO over bit vectors minimizes the (penalized)
dual objective over the representable alpha grid.

QUBO matrices here are upper-triangular: the energy of a bit vector x is
sum_{i<=j} Q[i,j] * x[i] * x[j].
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import atomic_write_text, format_real
from .dataset import Dataset
from .kernels import KernelParams, kernel_matrix

EXHAUSTIVE_GUARD = 24  # also used by the solver module


@dataclass(frozen=True)
class EncodingParams:
    """How dual variables are encoded into bits, and the kernel to use.

    Parameters
    ----------
    base : int
        Base of the positional encoding, at least 2.
    bits_per_alpha : int
        Number of binary digits per dual variable, at least 1.
    penalty : float
        Non-negative weight of the balance-constraint penalty. Zero disables
        the penalty entirely.
    kernel : KernelParams
        Kernel evaluated between training points.
    """

    base: int = 2
    bits_per_alpha: int = 2
    penalty: float = 0.0
    kernel: KernelParams = KernelParams()

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base!r}")
        if int(self.bits_per_alpha) != self.bits_per_alpha or self.bits_per_alpha < 1:
            raise ValueError(f"bits_per_alpha must be an integer >= 1, got {self.bits_per_alpha!r}")
        if not (np.isfinite(self.penalty) and self.penalty >= 0):
            raise ValueError(f"penalty must be non-negative and finite, got {self.penalty!r}")
        object.__setattr__(self, "base", int(self.base))
        object.__setattr__(self, "bits_per_alpha", int(self.bits_per_alpha))

    @property
    def c_bound(self) -> int:
        return max_alpha(self.base, self.bits_per_alpha)


def max_alpha(base: int, bits_per_alpha: int) -> int:
    """Largest decodable dual variable: sum of base**k for k in 0..bits-1.

    This doubles as the box constraint C of the dual problem.
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if bits_per_alpha < 1:
        raise ValueError(f"bits_per_alpha must be >= 1, got {bits_per_alpha}")
    return sum(base**k for k in range(bits_per_alpha))


def decode_alphas(bits, base: int, bits_per_alpha: int) -> np.ndarray:
    """Decode a bit vector into dual variables.

    ``bits`` holds ``bits_per_alpha`` consecutive digits per variable, least
    significant first. Every decoded value lies in [0, max_alpha(...)].
    """
    vec = _check_bits(bits)
    if vec.size % bits_per_alpha != 0:
        raise ValueError(
            f"bit vector of length {vec.size} is not a multiple of bits_per_alpha={bits_per_alpha}"
        )
    weights = float(base) ** np.arange(bits_per_alpha)
    return vec.reshape(-1, bits_per_alpha).astype(float) @ weights


def encode_alphas(alphas, base: int, bits_per_alpha: int) -> np.ndarray:
    """Inverse of decode_alphas: recover the bit vector of encodable values.

    Digit weights 1, base, base**2, ... have distinct subset sums (each power
    exceeds the sum of all smaller ones), so the greedy largest-first digit
    choice is the unique preimage. Values that are not a subset sum, such as
    the continuous coefficients of the classical solver, are rejected.
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if bits_per_alpha < 1:
        raise ValueError(f"bits_per_alpha must be >= 1, got {bits_per_alpha}")
    values = np.asarray(alphas, dtype=float)
    if values.ndim != 1:
        raise ValueError(f"expected a 1-d alpha vector, got ndim={values.ndim}")
    bits = np.zeros((values.size, bits_per_alpha), dtype=np.int64)
    for n, value in enumerate(values):
        remaining = float(value)
        for k in range(bits_per_alpha - 1, -1, -1):
            weight = float(base) ** k
            if remaining >= weight:
                bits[n, k] = 1
                remaining -= weight
        if remaining != 0.0:
            raise ValueError(
                f"alpha {value!r} is not encodable with base={base}, "
                f"bits_per_alpha={bits_per_alpha}"
            )
    return bits.reshape(-1)


@dataclass(frozen=True)
class QuboProblem:
    """An upper-triangular QUBO coefficient matrix."""

    coeffs: np.ndarray

    def __post_init__(self):
        m = np.array(self.coeffs, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"coefficient matrix must be square, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("coefficient matrix must be non-empty")
        if not np.all(np.isfinite(m)):
            raise ValueError("coefficient matrix contains non-finite values")
        if np.any(np.tril(m, -1) != 0):
            raise ValueError("coefficient matrix has non-zero entries below the diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "coeffs", m)

    @property
    def num_vars(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class IsingProblem:
    """Ising form: per-spin fields, strictly-upper couplings, and the constant
    offset that aligns its energies with the originating QUBO."""

    fields: np.ndarray
    couplings: np.ndarray
    offset: float

    def __post_init__(self):
        h = np.array(self.fields, dtype=float)
        J = np.array(self.couplings, dtype=float)
        if h.ndim != 1:
            raise ValueError("fields must be a 1-d array")
        if J.shape != (h.size, h.size):
            raise ValueError(f"couplings shape {J.shape} does not match {h.size} spins")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(J)) and np.isfinite(self.offset)):
            raise ValueError("Ising problem contains non-finite values")
        if np.any(np.tril(J) != 0):
            raise ValueError("couplings must be strictly upper-triangular")
        h.setflags(write=False)
        J.setflags(write=False)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "couplings", J)

    @property
    def num_spins(self) -> int:
        return self.fields.size


def _check_bits(bits) -> np.ndarray:
    vec = np.asarray(bits, dtype=float)
    if vec.ndim != 1:
        raise ValueError("bit vector must be 1-d")
    if not np.all(np.isfinite(vec)) or np.any((vec != 0) & (vec != 1)):
        raise ValueError("bit vector entries must be 0 or 1")
    return vec.astype(np.int64)


def symmetric_to_upper(matrix) -> np.ndarray:
    """Fold a symmetric coefficient matrix into upper-triangular form without
    changing any assignment's energy: off-diagonal pairs are summed into the
    upper entry, the diagonal is kept."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    return np.triu(m) + np.triu(m.T, 1)


def build_qubo(data: Dataset, encoding: EncodingParams) -> QuboProblem:
    """Encode the dual problem for a binary dataset as a QUBO.

    The bit at index ``bits_per_alpha * n + k`` is digit k of alpha_n. For
    bits i, j belonging to (point n, digit k) and (point m, digit j), the
    symmetric coefficient is

        0.5 * base**(k+j) * t_n * t_m * (kernel(x_n, x_m) + penalty)

    minus ``base**k`` on the diagonal, which carries the linear
    "-sum alpha_n" part of the objective. The penalty term is
    penalty/2 * (sum_n alpha_n t_n)**2, folded into the same quadratic form.
    The result is returned in upper-triangular form.
    """
    labels = data.labels
    if not np.all(np.isin(labels, (-1, 1))):
        raise ValueError("binary labels in {-1, +1} required")
    t = labels.astype(float)
    gram = kernel_matrix(encoding.kernel, data.features)
    coeff = 0.5 * np.outer(t, t) * (gram + encoding.penalty)

    powers = float(encoding.base) ** np.arange(encoding.bits_per_alpha)
    sym = np.kron(coeff, np.outer(powers, powers))
    n_bits = sym.shape[0]
    sym[np.arange(n_bits), np.arange(n_bits)] -= np.tile(powers, data.num_points)
    return QuboProblem(symmetric_to_upper(sym))


def qubo_energy(problem: QuboProblem, bits) -> float:
    """Energy of one assignment: sum over i <= j of Q[i,j] * x[i] * x[j]."""
    vec = _check_bits(bits)
    if vec.size != problem.num_vars:
        raise ValueError(f"expected {problem.num_vars} bits, got {vec.size}")
    x = vec.astype(float)
    return float(x @ problem.coeffs @ x)


def qubo_to_ising(problem: QuboProblem) -> IsingProblem:
    """Convert to Ising form under the variable map spin = 2*bit - 1.

    For every assignment, ``ising_energy(result, spins) + result.offset``
    equals ``qubo_energy(problem, bits)`` up to rounding.
    """
    diag = np.diag(problem.coeffs)
    upper = np.triu(problem.coeffs, 1)
    couplings = upper / 4.0
    fields = diag / 2.0 + (upper.sum(axis=1) + upper.sum(axis=0)) / 4.0
    offset = float(diag.sum() / 2.0 + upper.sum() / 4.0)
    return IsingProblem(fields, couplings, offset)


def ising_energy(problem: IsingProblem, spins) -> float:
    """Plain Ising energy sum(h_i s_i) + sum_{i<j} J_ij s_i s_j (no offset)."""
    s = np.asarray(spins, dtype=float)
    if s.shape != (problem.num_spins,):
        raise ValueError(f"expected {problem.num_spins} spins, got shape {s.shape}")
    if np.any(np.abs(s) != 1):
        raise ValueError("spins must be -1 or +1")
    return float(problem.fields @ s + s @ problem.couplings @ s)


def qubo_to_text(problem: QuboProblem) -> str:
    """Serialize as a sparse text block: a ``vars N`` header, then one
    ``i j value`` line per non-zero upper-triangular entry in row-major
    order, values with 17 significant digits (lossless)."""
    lines = [f"vars {problem.num_vars}"]
    rows, cols = np.nonzero(problem.coeffs)
    for i, j in zip(rows, cols):
        lines.append(f"{i} {j} {format_real(problem.coeffs[i, j])}")
    return "\n".join(lines) + "\n"


def save_qubo(problem: QuboProblem, path) -> None:
    atomic_write_text(path, qubo_to_text(problem))


def qubo_from_text(text: str, source: str = "<text>") -> QuboProblem:
    lines = [ln.strip() for ln in text.splitlines()]
    rows = [(num, ln) for num, ln in enumerate(lines, start=1) if ln and not ln.startswith("#")]
    if not rows:
        raise ValueError(f"{source}: empty QUBO file")
    num, header = rows[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "vars":
        raise ValueError(f"{source}: line {num}: expected header 'vars N', got {header!r}")
    try:
        n = int(parts[1])
    except ValueError:
        raise ValueError(f"{source}: line {num}: variable count {parts[1]!r} is not an integer") from None
    if n < 1:
        raise ValueError(f"{source}: line {num}: variable count must be >= 1")

    coeffs = np.zeros((n, n))
    seen = set()
    for num, line in rows[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{source}: line {num}: expected 'i j value', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            value = float(parts[2])
        except ValueError:
            raise ValueError(f"{source}: line {num}: malformed entry {line!r}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"{source}: line {num}: index ({i}, {j}) out of range for {n} variables")
        if i > j:
            raise ValueError(f"{source}: line {num}: entry ({i}, {j}) is below the diagonal")
        if (i, j) in seen:
            raise ValueError(f"{source}: line {num}: duplicate entry for ({i}, {j})")
        if not np.isfinite(value):
            raise ValueError(f"{source}: line {num}: non-finite value")
        seen.add((i, j))
        coeffs[i, j] = value
    return QuboProblem(coeffs)


def load_qubo(path) -> QuboProblem:
    path = Path(path)
    return qubo_from_text(path.read_text(), source=str(path))
