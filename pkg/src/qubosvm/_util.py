"""Internal helpers shared across modules: lossless float text, atomic file
writes, deterministic seed derivation, and the list syntax of config values
and CLI flags."""

from __future__ import annotations

import os
import tempfile

import numpy as np


def format_real(x: float) -> str:
    """Render a float with 17 significant digits.

    17 significant decimal digits round-trip any binary64 value exactly,
    which the text file formats rely on.
    """
    return f"{float(x):.17g}"


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` through a same-directory temp file and an
    atomic rename, so readers never observe a partially written file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic child seed from a master seed and integer stream keys.

    Children for distinct key tuples are statistically independent, and the
    mapping is stable across runs and platforms.
    """
    ss = np.random.SeedSequence([int(master), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


# list-valued config values and CLI flags share one syntax: commas between
# scalars, semicolons between points


def parse_bool(value: str) -> bool:
    word = value.strip().lower()
    if word in ("1", "true", "yes", "on"):
        return True
    if word in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_ints(value: str) -> tuple[int, ...]:
    return tuple(int(part) for part in value.split(","))


def parse_floats(value: str) -> tuple[float, ...]:
    return tuple(float(part) for part in value.split(","))


def parse_points(value: str) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(c) for c in part.split(",")) for part in value.split(";"))
