"""Index sequences with controlled growth, and their shell/residue structure.

The averaging operators act along a strictly increasing sequence of positive
integers a(1), a(2), ....  The regime of interest is the growth condition

    a(n+1) >= (1 + n^-delta) a(n)        for all n >= 1,

with 0 < delta <= 1.  Inside the dyadic index shell 2^m <= N < 2^{m+1} a step
of R_m = ceil(kappa_delta 2^{m delta}) indices then multiplies a by at least 2
(kappa_delta = 2^{1+delta} ln 2 + 2, natural log), so splitting a shell into
residue classes mod R_m yields lacunary strands with strictly increasing
top-bit exponents.  That combinatorial structure is what the martingale
arguments in :mod:`walshmeans.means` consume.

Sequence terms are capped at 2^62 so they always fit int64 with headroom for
doubling comparisons; generation past the cap raises instead of wrapping.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, GenerationError

KINDS = ("minimal_growth", "lacunary", "polynomial", "explicit")

#: Terms never exceed 2^62: doubling stays inside int64 and float rounding in
#: the growth check stays far below its guard.
MAX_TERM = 1 << 62

#: Relative slack allowed when checking the growth inequality with a floating
#: power n^delta.
GROWTH_GUARD = 1e-12

#: Hard cap on open-ended generation (n_terms=None); slow-growing kinds would
#: otherwise try to enumerate astronomically many terms below the limit.
MAX_AUTO_TERMS = 1 << 27

_POWERS = np.array([1 << t for t in range(63)], dtype=np.int64)


def _bit_lengths(values: np.ndarray) -> np.ndarray:
    """Exact bit lengths of positive int64 values (no float rounding)."""
    return np.searchsorted(_POWERS, values, side="right").astype(np.int64)


@dataclass(frozen=True, eq=False)
class Subsequence:
    """A strictly increasing sequence of positive integers a(1..N).

    ``delta`` records the growth parameter the sequence was built for (None
    when not applicable), ``kind`` its provenance.
    """

    kind: str
    delta: float | None
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown sequence kind {self.kind!r}")
        vals = np.asarray(self.values, dtype=np.int64)
        if vals.ndim != 1 or vals.size < 1:
            raise ArgumentError("a sequence needs at least one term")
        if vals[0] < 1:
            raise ArgumentError("sequence terms must be positive")
        if vals.size > 1 and not np.all(np.diff(vals) > 0):
            raise ArgumentError("sequence must be strictly increasing")
        if int(vals[-1]) > MAX_TERM:
            raise ArgumentError("sequence terms must not exceed 2^62")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    def a(self, n: int) -> int:
        """Term a(n), 1-indexed."""
        if not 1 <= n <= len(self):
            raise ArgumentError(f"index {n} outside the {len(self)} defined terms")
        return int(self.values[n - 1])

    def exponent(self, n: int) -> int:
        """Top set-bit position of a(n)."""
        return self.a(n).bit_length() - 1

    def exponents(self) -> np.ndarray:
        """Top set-bit positions of every term."""
        return _bit_lengths(self.values) - 1

    def admissible_count(self, resolution: int, *, strict: bool = False) -> int:
        """Largest N with a(N) <= 2^resolution (strict: a(N) < 2^resolution).

        Strict admissibility is what the decomposition-based operators need;
        plain admissibility suffices for partial sums.
        """
        limit = (1 << resolution) - (1 if strict else 0)
        return int(np.searchsorted(self.values, limit, side="right"))

    def truncated(self, n_terms: int) -> "Subsequence":
        """Prefix a(1..n_terms)."""
        if not 1 <= n_terms <= len(self):
            raise ArgumentError(f"cannot keep {n_terms} of {len(self)} terms")
        return Subsequence(self.kind, self.delta, self.values[:n_terms].copy())


def _gen_minimal_growth(delta: float, a1: int, n_terms: int | None, limit: int):
    """Smallest sequence meeting strict increase plus the growth inequality.

    With delta = 1 the requirement (1 + 1/n) a is rational and handled in
    exact integer arithmetic; otherwise the float ceiling is taken, whose
    worst-case error is absorbed by the growth check's relative guard.
    """
    out = array("q", [a1])
    a = a1
    n = 1
    while n_terms is None or len(out) < n_terms:
        if n_terms is None and len(out) >= MAX_AUTO_TERMS:
            raise ArgumentError(
                f"open-ended generation exceeded {MAX_AUTO_TERMS} terms below the"
                " limit; pass n_terms explicitly"
            )
        if delta == 1.0:
            nxt = a + -(-a // n)
        else:
            nxt = math.ceil(a + a * n ** (-delta))
        if nxt <= a:
            nxt = a + 1
        if nxt > MAX_TERM or (n_terms is None and nxt > limit):
            if n_terms is not None:
                raise GenerationError(
                    f"term {len(out) + 1} of the minimal-growth sequence exceeds"
                    f" 2^62; largest valid N is {len(out)}",
                    max_valid_terms=len(out),
                )
            break
        out.append(nxt)
        a = nxt
        n += 1
    return out


def gen_sequence(
    kind: str,
    n_terms: int | None = None,
    *,
    delta: float | None = None,
    a1: int = 1,
    ratio: float | None = None,
    degree: int | None = None,
    values=None,
    limit: int = MAX_TERM,
) -> Subsequence:
    """Build a sequence of one of the supported kinds.

    ``n_terms`` may be None for the growth-driven kinds, in which case terms
    are generated while they stay <= ``limit`` (2^62 by default).  Passing an
    explicit ``n_terms`` that would push a term past 2^62 raises
    :class:`GenerationError` naming the largest valid N.

    * ``minimal_growth``: a(n+1) is the smallest integer satisfying both the
      strict increase and the growth inequality for ``delta`` in (0, 1]; the
      extremal test object for the averaging theory.
    * ``lacunary``: a(n) = ceil(a1 * ratio^(n-1)) forced strictly increasing,
      ratio > 1.
    * ``polynomial``: a(n) = n^degree.
    * ``explicit``: the given values, validated.
    """
    if kind == "explicit":
        if values is None:
            raise ArgumentError("explicit sequences need values")
        return Subsequence("explicit", delta, np.asarray(values, dtype=np.int64))
    if n_terms is not None and n_terms < 1:
        raise ArgumentError(f"need at least one term, got {n_terms}")
    if limit > MAX_TERM:
        raise ArgumentError("limit cannot exceed 2^62")

    if kind == "minimal_growth":
        if delta is None or not 0.0 < delta <= 1.0:
            raise ArgumentError(
                f"minimal growth needs delta in (0, 1], got {delta!r}"
            )
        if a1 < 1:
            raise ArgumentError(f"first term must be positive, got {a1}")
        out = _gen_minimal_growth(delta, a1, n_terms, limit)
        return Subsequence("minimal_growth", delta, np.frombuffer(out, dtype=np.int64))

    if kind == "lacunary":
        if ratio is None or not ratio > 1.0:
            raise ArgumentError(f"lacunary sequences need ratio > 1, got {ratio!r}")
        if a1 < 1:
            raise ArgumentError(f"first term must be positive, got {a1}")
        out = array("q", [a1])
        prev = a1
        n = 2
        while n_terms is None or len(out) < n_terms:
            if n_terms is None and len(out) >= MAX_AUTO_TERMS:
                raise ArgumentError(
                    f"open-ended generation exceeded {MAX_AUTO_TERMS} terms below"
                    " the limit; pass n_terms explicitly"
                )
            if (n - 1) * math.log2(ratio) + math.log2(a1) > 63:
                nxt = MAX_TERM + 1
            else:
                nxt = max(prev + 1, math.ceil(a1 * ratio ** (n - 1)))
            if nxt > MAX_TERM or (n_terms is None and nxt > limit):
                if n_terms is not None:
                    raise GenerationError(
                        f"term {n} of the lacunary sequence exceeds 2^62;"
                        f" largest valid N is {len(out)}",
                        max_valid_terms=len(out),
                    )
                break
            out.append(nxt)
            prev = nxt
            n += 1
        return Subsequence("lacunary", delta, np.frombuffer(out, dtype=np.int64))

    if kind == "polynomial":
        if degree is None or degree < 1:
            raise ArgumentError(f"polynomial sequences need degree >= 1, got {degree!r}")
        if n_terms is None:
            n_terms = int(math.floor(limit ** (1.0 / degree)))
            while (n_terms + 1) ** degree <= limit:
                n_terms += 1
            while n_terms**degree > limit:
                n_terms -= 1
            if n_terms > MAX_AUTO_TERMS:
                raise ArgumentError(
                    f"open-ended generation would produce {n_terms} terms below"
                    " the limit; pass n_terms explicitly"
                )
        if n_terms**degree > MAX_TERM:
            max_valid = int(math.floor(MAX_TERM ** (1.0 / degree)))
            while max_valid**degree > MAX_TERM:
                max_valid -= 1
            raise GenerationError(
                f"n^{degree} exceeds 2^62 at n = {n_terms}; largest valid N is"
                f" {max_valid}",
                max_valid_terms=max_valid,
            )
        vals = np.arange(1, n_terms + 1, dtype=np.int64) ** degree
        return Subsequence("polynomial", delta, vals)

    raise ArgumentError(f"unknown sequence kind {kind!r}")


def check_growth(seq: Subsequence, delta: float) -> int | None:
    """First index n where a(n+1) < (1 + n^-delta) a(n), or None if none.

    The comparison multiplies through by n^delta and allows a 1e-12 relative
    guard on the floating power, so float rounding never flags a sequence
    that satisfies the inequality exactly.
    """
    if not 0.0 < delta <= 1.0:
        raise ArgumentError(f"growth parameter must lie in (0, 1], got {delta!r}")
    vals = seq.values
    if vals.size < 2:
        return None
    n = np.arange(1, vals.size, dtype=np.float64)
    power = n**delta
    lhs = vals[1:].astype(np.float64) * power
    rhs = vals[:-1].astype(np.float64) * (power + 1.0)
    bad = lhs < rhs * (1.0 - GROWTH_GUARD)
    if bad.any():
        return int(np.argmax(bad)) + 1
    return None


def shell_step(delta: float, m: int) -> tuple[float, int]:
    """Step constant kappa_delta and residue step R_m for shell index m.

    kappa_delta = 2^{1+delta} ln 2 + 2 (natural logarithm) and
    R_m = ceil(kappa_delta 2^{m delta}); defined for 0 < delta < 1, the open
    range of the doubling lemma.  R_m is always >= 3.
    """
    if not 0.0 < delta < 1.0:
        raise ArgumentError(
            f"shell machinery needs delta in the open interval (0, 1),"
            f" got {delta!r}"
        )
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise ArgumentError(f"shell index must be a nonnegative integer, got {m!r}")
    kappa = 2.0 ** (1.0 + delta) * math.log(2.0) + 2.0
    return kappa, math.ceil(kappa * 2.0 ** (m * delta))


@dataclass(frozen=True)
class ShellPartition:
    """Residue-class structure of one dyadic index shell.

    The tail range {2^m + 1, ..., 2^{m+1} - 1} is split by residue mod R_m
    into the ordered classes consumed by the shell martingales;
    ``tail_exponents`` holds the top-bit exponents of the matching sequence
    terms.  The head range {1, ..., 2^m}, split the same way, feeds the
    head-term estimate.
    """

    m: int
    delta: float
    kappa: float
    step: int
    tail_classes: tuple[tuple[int, ...], ...]
    tail_exponents: tuple[tuple[int, ...], ...]
    head_classes: tuple[tuple[int, ...], ...]


def shell_partition(seq: Subsequence, delta: float, m: int) -> ShellPartition:
    """Split shell m of the index range by residue mod R_m."""
    kappa, step = shell_step(delta, m)
    tail_hi = 1 << (m + 1)
    if len(seq) < tail_hi - 1:
        raise ArgumentError(
            f"shell {m} needs the sequence defined up to index {tail_hi - 1},"
            f" got {len(seq)} terms"
        )
    tail: list[list[int]] = [[] for _ in range(step)]
    for idx in range((1 << m) + 1, tail_hi):
        tail[idx % step].append(idx)
    head: list[list[int]] = [[] for _ in range(step)]
    for idx in range(1, (1 << m) + 1):
        head[idx % step].append(idx)
    exps = tuple(
        tuple(seq.a(idx).bit_length() - 1 for idx in cls) for cls in tail
    )
    return ShellPartition(
        int(m),
        float(delta),
        kappa,
        step,
        tuple(tuple(cls) for cls in tail),
        exps,
        tuple(tuple(cls) for cls in head),
    )


@dataclass(frozen=True)
class LacunarityReport:
    """Outcome of the exact doubling scan across shells.

    ``failures`` lists (m, beta) pairs where a(beta + R_m) < 2 a(beta) or the
    top-bit exponent failed to increase.
    """

    delta: float
    m_max: int
    comparisons: int
    failures: tuple[tuple[int, int], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_shell_lacunarity(
    seq: Subsequence, delta: float, m_max: int
) -> LacunarityReport:
    """Exact integer check that one residue step doubles the sequence.

    For every shell m <= m_max and every start beta >= 1 with
    beta + R_m <= 2^{m+1}, asserts a(beta + R_m) >= 2 a(beta) and that the
    top-bit exponent strictly increases.  Requires the growth condition to
    hold (checked first) and the sequence to reach index 2^{m_max + 1}.
    """
    first_bad = check_growth(seq, delta)
    if first_bad is not None:
        raise ArgumentError(
            f"growth condition with delta={delta} fails at n={first_bad};"
            " the doubling lemma does not apply"
        )
    if m_max < 0:
        raise ArgumentError(f"m_max must be nonnegative, got {m_max}")
    needed = 1 << (m_max + 1)
    if len(seq) < needed:
        raise ArgumentError(
            f"shells up to {m_max} need the sequence defined up to index"
            f" {needed}, got {len(seq)} terms"
        )
    vals = seq.values
    bits = _bit_lengths(vals)
    comparisons = 0
    failures: list[tuple[int, int]] = []
    for m in range(m_max + 1):
        _, step = shell_step(delta, m)
        top = 1 << (m + 1)
        if step >= top:
            continue
        lhs = vals[step:top]
        base = vals[: top - step]
        # a(beta + R) >= 2 a(beta), written subtraction-first so 2*a cannot
        # overflow int64 at the 2^62 cap
        bad = (lhs - base) < base
        bad |= bits[step:top] < bits[: top - step] + 1
        comparisons += int(lhs.size)
        for offset in np.nonzero(bad)[0]:
            failures.append((m, int(offset) + 1))
    return LacunarityReport(float(delta), int(m_max), comparisons, tuple(failures))


def save_sequence(seq: Subsequence, path) -> None:
    """Write a sequence file: a provenance header line, then one term per line."""
    delta_txt = "none" if seq.delta is None else repr(float(seq.delta))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# kind={seq.kind} delta={delta_txt}\n")
        for v in seq.values:
            fh.write(f"{int(v)}\n")


def load_sequence(path) -> Subsequence:
    """Read a sequence file written by :func:`save_sequence`."""
    kind = "explicit"
    delta: float | None = None
    terms: list[int] = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for field in line[1:].split():
                    if field.startswith("kind="):
                        kind = field[5:]
                    elif field.startswith("delta="):
                        raw = field[6:]
                        delta = None if raw == "none" else float(raw)
                continue
            terms.append(int(line))
    if not terms:
        raise ArgumentError(f"sequence file {path} contains no terms")
    if kind not in KINDS:
        raise ArgumentError(f"sequence file {path} names unknown kind {kind!r}")
    return Subsequence(kind, delta, np.asarray(terms, dtype=np.int64))
