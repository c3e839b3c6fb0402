"""Averaging operators along a subsequence, their splitting, and stopped sums.

For a sequence a(1..N) the basic object is the arithmetic mean of partial sums

    sigma_N f = (1/N) sum_{n<=N} S_{a(n)} f.

Splitting each partial sum through the kernel decomposition turns sigma_N into
three averaged components: conditional expectations one rank above each term's
top bit (sigma0), Walsh-twisted expectations at each term's bottom bit (rho),
and block-kernel convolutions (sigma_tilde).  The first two are dominated
pointwise by twice the dyadic maximal function; the third is controlled by a
stopping-time construction:

* the stopping time nu_lambda is the first rank where the running dyadic
  average of |f| exceeds lambda (infinity when it never does);
* the stopped block sum X_n keeps each block convolution of a(n) only where
  the stopping time has not yet fired at that block's depth, which confines
  X_n's spectrum to the dyadic shell [2^A, 2^{A+1}), A the top bit of a(n),
  makes the kept pieces pairwise orthogonal, and kills the shell-bottom
  conditional expectation;
* along a residue class of a dyadic index shell the exponents A strictly
  increase (see :mod:`walshmeans.sequences`), so the partial sums of the X's
  form a genuine L^2 martingale and Doob's inequality bounds the path maximum
  by 4x the final second moment.

All suprema over N here are finite-horizon with a(N) below the resolution
limit; a step function carries no frequencies >= 2^M, so larger N only adds
terms that have already converged.  Sweeps accumulate in a fixed order, making
results reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    StepFunction,
    _analyze_values,
    _cell_means,
    _synth_values,
    cond_expect,
    dyadic_maximal,
    walsh_values,
)
from .decomposition import SUPPORT_TOL, blocks
from .errors import ArgumentError, IdentityError, ResolutionError
from .sequences import Subsequence, shell_partition

#: Absolute tolerance for the runtime identity checks in this module.
IDENTITY_TOL = 1e-9

#: Second moments below this are treated as a degenerate (all-zero) martingale
#: when forming Doob ratios.
DEGENERATE_NORM_SQ = 1e-16


def _require_terms(
    seq: Subsequence, n_terms: int, resolution: int, *, strict: bool
) -> None:
    if not isinstance(n_terms, (int, np.integer)) or n_terms < 1:
        raise ArgumentError(f"need at least one averaged term, got {n_terms!r}")
    if n_terms > len(seq):
        raise ArgumentError(
            f"sequence defines {len(seq)} terms, cannot average {n_terms}"
        )
    admissible = seq.admissible_count(resolution, strict=strict)
    if n_terms > admissible:
        raise ResolutionError(
            f"a({n_terms}) = {seq.a(n_terms)} exceeds resolution {resolution};"
            f" largest admissible N is {admissible}"
        )


def _tail_counts(seq: Subsequence, n_terms: int, resolution: int) -> np.ndarray:
    """Per frequency k, how many of a(1..N) exceed k.

    The running sum of the first N partial sums has spectrum
    f^(k) * tail_count(k), which lets a whole sigma sweep reuse one analysis.
    """
    freqs = np.arange(1 << resolution, dtype=np.int64)
    return (
        n_terms - np.searchsorted(seq.values[:n_terms], freqs, side="right")
    ).astype(np.float64)


def sigma_mean(f: StepFunction, seq: Subsequence, n_terms: int) -> StepFunction:
    """Arithmetic mean of the partial sums of f at orders a(1..n_terms)."""
    _require_terms(seq, n_terms, f.resolution, strict=False)
    coeffs = _analyze_values(f.values, f.resolution)
    weights = _tail_counts(seq, n_terms, f.resolution) / n_terms
    return StepFunction(f.resolution, _synth_values(coeffs * weights, f.resolution))


class SigmaParts(NamedTuple):
    """The three averaged components of sigma_N and the splitting residual."""

    sigma0: StepFunction
    rho: StepFunction
    sigma_tilde: StepFunction
    residual: float


def sigma_parts(f: StepFunction, seq: Subsequence, n_terms: int) -> SigmaParts:
    """Split sigma_N into its three averaged components.

    Also enforces the pointwise domination |sigma0| + |rho| <= 2 f* (within
    tolerance); the returned residual is the sup-norm gap between sigma_N and
    sigma0 - rho + sigma_tilde.
    """
    _require_terms(seq, n_terms, f.resolution, strict=True)
    res = f.resolution
    cells = f.cells

    # head component: group the terms by conditioning rank
    rank_counts: dict[int, int] = {}
    for n in range(1, n_terms + 1):
        rank = seq.exponent(n) + 1
        rank_counts[rank] = rank_counts.get(rank, 0) + 1
    sigma0_vals = np.zeros(cells)
    for rank, count in sorted(rank_counts.items()):
        sigma0_vals += (count / n_terms) * _cell_means(f.values, res, rank)

    # twisted component, term by term
    rho_vals = np.zeros(cells)
    for n in range(1, n_terms + 1):
        a_n = seq.a(n)
        signs = walsh_values(a_n, res)
        bottom = (a_n & -a_n).bit_length() - 1
        rho_vals += signs * _cell_means(f.values * signs, res, bottom)
    rho_vals /= n_terms

    # block component, accumulated spectrally
    coeffs = _analyze_values(f.values, res)
    tilde_spec = np.zeros(cells)
    for n in range(1, n_terms + 1):
        for blk in blocks(seq.a(n)):
            tilde_spec[blk.lo : blk.hi_exclusive] -= coeffs[blk.lo : blk.hi_exclusive]
    tilde_vals = _synth_values(tilde_spec / n_terms, res)

    sigma = sigma_mean(f, seq, n_terms)
    residual = float(
        np.max(np.abs(sigma.values - (sigma0_vals - rho_vals + tilde_vals)))
    )

    ceiling = 2.0 * dyadic_maximal(f).values + IDENTITY_TOL
    excess = float(np.max(np.abs(sigma0_vals) + np.abs(rho_vals) - ceiling))
    if excess > 0:
        raise IdentityError(
            f"maximal domination of the first two components fails by {excess:.3e}"
        )
    return SigmaParts(
        StepFunction(res, sigma0_vals),
        StepFunction(res, rho_vals),
        StepFunction(res, tilde_vals),
        residual,
    )


def maximal_sigma(f: StepFunction, seq: Subsequence, n_max: int) -> StepFunction:
    """Pointwise max of |sigma_N f| over 1 <= N <= n_max (finite horizon)."""
    _require_terms(seq, n_max, f.resolution, strict=False)
    coeffs = _analyze_values(f.values, f.resolution)
    counts = np.zeros(f.cells)
    best = np.zeros(f.cells)
    for n in range(1, n_max + 1):
        counts[: min(seq.a(n), f.cells)] += 1.0
        vals = _synth_values(coeffs * (counts / n), f.resolution)
        np.maximum(best, np.abs(vals), out=best)
    return StepFunction(f.resolution, best)


def maximal_sigma_tilde(
    f: StepFunction, seq: Subsequence, n_max: int
) -> StepFunction:
    """Pointwise max of |sigma_tilde_N f| over 1 <= N <= n_max."""
    _require_terms(seq, n_max, f.resolution, strict=True)
    coeffs = _analyze_values(f.values, f.resolution)
    acc = np.zeros(f.cells)
    best = np.zeros(f.cells)
    for n in range(1, n_max + 1):
        for blk in blocks(seq.a(n)):
            acc[blk.lo : blk.hi_exclusive] -= coeffs[blk.lo : blk.hi_exclusive]
        vals = _synth_values(acc / n, f.resolution)
        np.maximum(best, np.abs(vals), out=best)
    return StepFunction(f.resolution, best)


@dataclass(frozen=True, eq=False)
class StoppingProfile:
    """Per-cell value of the stopping time for one (f, lambda) pair.

    ``nu`` holds, for each rank-M cell, the first rank m at which the rank-m
    average of |f| exceeds lambda on that cell, or +inf when no rank does.
    Because each rank-m average is constant on rank-m cells, {nu > i} is a
    union of rank-i cells for every i.
    """

    resolution: int
    lam: float
    nu: np.ndarray

    def indicator_above(self, i: int) -> np.ndarray:
        """Cell indicator of {nu > i} as a float array."""
        return (self.nu > i).astype(np.float64)

    def never_stopped(self) -> np.ndarray:
        """Boolean mask of the cells where the stopping time is infinite."""
        return np.isinf(self.nu)


def stopping_time(f: StepFunction, lam: float) -> StoppingProfile:
    """First rank where the dyadic averages of |f| exceed lambda (strictly).

    On step functions the averages are constant in rank beyond M, so scanning
    ranks 0..M is exact; ties (average equal to lambda) do not stop.
    """
    if not lam > 0:
        raise ArgumentError(f"stopping threshold must be positive, got {lam!r}")
    levels = [np.abs(f.values)]
    for _ in range(f.resolution):
        levels.append(levels[-1].reshape(-1, 2).mean(axis=1))
    levels.reverse()  # levels[m] = rank-m averages, 2^m entries
    nu = np.full(f.cells, np.inf)
    for m in range(f.resolution + 1):
        width = 1 << (f.resolution - m)
        fired = np.repeat(levels[m] > lam, width)
        nu = np.where(np.isinf(nu) & fired, float(m), nu)
    return StoppingProfile(f.resolution, float(lam), nu)


def _block_pieces(
    coeffs: np.ndarray, a_n: int, resolution: int
) -> list[tuple[int, np.ndarray]]:
    """Convolution of f with each modified kernel of order a_n.

    Spectrally each piece is -f^ restricted to one block, so one synthesis per
    block suffices.  Returns (bit position, cell values) pairs.
    """
    cells = 1 << resolution
    pieces = []
    for blk in blocks(a_n):
        spec = np.zeros(cells)
        spec[blk.lo : blk.hi_exclusive] = -coeffs[blk.lo : blk.hi_exclusive]
        pieces.append((blk.i, _synth_values(spec, resolution)))
    return pieces


def _l2_sq(values: np.ndarray) -> float:
    return float(np.square(values).sum()) / values.size


def _assemble_stopped(
    pieces: list[tuple[int, np.ndarray]], profile: StoppingProfile, cells: int
) -> np.ndarray:
    acc = np.zeros(cells)
    for i, piece in pieces:
        acc += profile.indicator_above(i) * piece
    return acc


def _check_stopped_sum(values: np.ndarray, top: int, resolution: int) -> None:
    """Shared postconditions of a stopped block sum.

    The spectrum must stay inside the dyadic shell [2^top, 2^{top+1}) and the
    rank-top conditional expectation must vanish.
    """
    coeffs = _analyze_values(values, resolution)
    outside = np.abs(
        np.concatenate((coeffs[: 1 << top], coeffs[1 << (top + 1) :]))
    )
    leak = float(outside.max()) if outside.size else 0.0
    if leak > SUPPORT_TOL:
        raise IdentityError(
            f"stopped sum leaks {leak:.3e} outside its dyadic frequency shell"
        )
    flat = float(np.max(np.abs(_cell_means(values, resolution, top))))
    if flat > IDENTITY_TOL:
        raise IdentityError(
            f"stopped sum has rank-{top} conditional expectation {flat:.3e}"
        )


def stopped_block_sum(
    f: StepFunction,
    seq: Subsequence,
    n: int,
    lam: float,
    *,
    profile: StoppingProfile | None = None,
) -> StepFunction:
    """Stopped sum X_n: block convolutions of a(n) kept where nu > block depth.

    Verifies the shell support of the result and the vanishing of its
    shell-bottom conditional expectation before returning.
    """
    a_n = seq.a(n)
    top = a_n.bit_length() - 1
    if top + 1 > f.resolution:
        raise ResolutionError(
            f"a({n}) = {a_n} needs resolution >= {top + 1}, got {f.resolution}"
        )
    if profile is None:
        profile = stopping_time(f, lam)
    coeffs = _analyze_values(f.values, f.resolution)
    acc = _assemble_stopped(_block_pieces(coeffs, a_n, f.resolution), profile, f.cells)
    _check_stopped_sum(acc, top, f.resolution)
    return StepFunction(f.resolution, acc)


def stopped_square_ratio(
    f: StepFunction, seq: Subsequence, n: int, lam: float
) -> float:
    """Sum of squared norms of the kept pieces, normalized by lambda ||f||_1.

    The constant bounding this ratio is not explicit in the theory, so the
    value is reported rather than asserted; what is asserted is the exact
    Pythagoras identity against ||X_n||_2^2 (the kept pieces are pairwise
    orthogonal).  Both sides are homogeneous of degree 2 under
    (f, lambda) -> (c f, c lambda).
    """
    norm1 = f.l1_norm()
    if norm1 <= 0:
        raise ArgumentError("stopped square ratio needs a nonzero function")
    if not lam > 0:
        raise ArgumentError(f"stopping threshold must be positive, got {lam!r}")
    a_n = seq.a(n)
    if a_n.bit_length() > f.resolution:
        raise ResolutionError(
            f"a({n}) = {a_n} needs resolution >= {a_n.bit_length()},"
            f" got {f.resolution}"
        )
    profile = stopping_time(f, lam)
    coeffs = _analyze_values(f.values, f.resolution)
    pieces = _block_pieces(coeffs, a_n, f.resolution)
    acc = np.zeros(f.cells)
    lhs = 0.0
    for i, piece in pieces:
        kept = profile.indicator_above(i) * piece
        lhs += _l2_sq(kept)
        acc += kept
    gap = abs(lhs - _l2_sq(acc))
    if gap > IDENTITY_TOL:
        raise IdentityError(f"piecewise Pythagoras identity fails by {gap:.3e}")
    return lhs / (lam * norm1)


@dataclass(frozen=True)
class MartingaleReport:
    """Doob diagnostics for one residue class of one index shell.

    ``indices`` are the class members actually used; classes are truncated to
    the terms representable at the working resolution (``truncated`` flags
    that), and a prefix of a martingale is again a martingale, so the Doob
    bound still applies.  ``doob_ratio`` is the squared L^2 norm of the path
    maximum over the squared final norm (0 for degenerate all-zero paths).
    """

    shell: int
    residue: int
    length: int
    indices: tuple[int, ...]
    truncated: bool
    increment_norms_sq: tuple[float, ...]
    path_max_sq_l1: float
    final_norm_sq: float
    doob_ratio: float
    orthogonality_residual: float


def martingale_suite(
    f: StepFunction,
    seq: Subsequence,
    delta: float,
    lam: float,
    m: int,
    b: int,
) -> MartingaleReport:
    """Build the stopped-sum martingale along residue class b of shell m.

    Verifies adaptedness (strictly increasing top-bit exponents and per-step
    shell support) and reports increment norms, the path-maximum second
    moment, the final second moment, their Doob ratio, and the defect in the
    orthogonal Pythagoras identity.
    """
    part = shell_partition(seq, delta, m)
    if not 0 <= b < part.step:
        raise ArgumentError(f"residue {b} outside [0, {part.step})")
    full = part.tail_classes[b]
    # a is increasing, so this filter keeps a prefix of the class
    usable = [n for n in full if seq.exponent(n) + 1 <= f.resolution]
    truncated = len(usable) < len(full)
    if not usable:
        return MartingaleReport(
            m, b, 0, (), truncated, (), 0.0, 0.0, 0.0, 0.0
        )
    exps = [seq.exponent(n) for n in usable]
    if any(e2 <= e1 for e1, e2 in zip(exps, exps[1:])):
        raise IdentityError(
            f"class (m={m}, b={b}) is not adapted: exponents {exps} do not"
            " strictly increase"
        )
    profile = stopping_time(f, lam)
    coeffs = _analyze_values(f.values, f.resolution)
    inc_norms = []
    acc = np.zeros(f.cells)
    path_max = np.zeros(f.cells)  # the path starts at the zero function
    for n in usable:
        a_n = seq.a(n)
        step_vals = _assemble_stopped(
            _block_pieces(coeffs, a_n, f.resolution), profile, f.cells
        )
        _check_stopped_sum(step_vals, a_n.bit_length() - 1, f.resolution)
        inc_norms.append(_l2_sq(step_vals))
        acc += step_vals
        np.maximum(path_max, np.abs(acc), out=path_max)
    final_sq = _l2_sq(acc)
    path_sq = _l2_sq(path_max)
    ratio = path_sq / final_sq if final_sq > DEGENERATE_NORM_SQ else 0.0
    return MartingaleReport(
        int(m),
        int(b),
        len(usable),
        tuple(usable),
        truncated,
        tuple(inc_norms),
        path_sq,
        final_sq,
        ratio,
        abs(final_sq - sum(inc_norms)),
    )


def stopped_mean_max(
    f: StepFunction,
    seq: Subsequence,
    lam: float,
    n_max: int,
    *,
    profile: StoppingProfile | None = None,
) -> StepFunction:
    """Finite-horizon maximal function of the stopped means (1/N) sum X_n.

    On the cells where the stopping time never fires every indicator is 1, so
    there the result must coincide with the maximal block component of sigma;
    that identity is checked before returning.
    """
    _require_terms(seq, n_max, f.resolution, strict=True)
    if profile is None:
        profile = stopping_time(f, lam)
    coeffs = _analyze_values(f.values, f.resolution)
    acc = np.zeros(f.cells)
    best = np.zeros(f.cells)
    for n in range(1, n_max + 1):
        acc += _assemble_stopped(
            _block_pieces(coeffs, seq.a(n), f.resolution), profile, f.cells
        )
        np.maximum(best, np.abs(acc) / n, out=best)
    quiet = profile.never_stopped()
    if quiet.any():
        tilde_best = maximal_sigma_tilde(f, seq, n_max).values
        gap = float(np.max(np.abs(best[quiet] - tilde_best[quiet])))
        if gap > IDENTITY_TOL:
            raise IdentityError(
                f"stopped maximal mean deviates by {gap:.3e} from the block"
                " maximal on the never-stopped set"
            )
    return StepFunction(f.resolution, best)


class ShellDiagnostics(NamedTuple):
    """L^1 sizes of the head and tail shell terms, plus the decay reference."""

    head_l1: float
    tail_sup_l1: float
    reference: float


def shell_diagnostics(
    f: StepFunction,
    seq: Subsequence,
    delta: float,
    lam: float,
    m: int,
) -> ShellDiagnostics:
    """Head/tail second-moment diagnostics for index shell m.

    head is (2/2^{2m}) |sum_{n<=2^m} X_n|^2, tail_sup the same normalization
    applied to the running tail sums over 2^m < n <= N maximized over the
    shell, both reported through their L^1 norms.  ``reference`` is
    2^{-m(1-delta)} lambda ||f||_1, the decay the theory predicts up to an
    inexplicit constant; ratios are for trend inspection, not assertion.
    """
    last = (1 << (m + 1)) - 1
    if last > len(seq):
        raise ArgumentError(
            f"shell {m} needs {last} sequence terms, got {len(seq)}"
        )
    _require_terms(seq, last, f.resolution, strict=True)
    if not lam > 0:
        raise ArgumentError(f"stopping threshold must be positive, got {lam!r}")
    profile = stopping_time(f, lam)
    coeffs = _analyze_values(f.values, f.resolution)

    def stopped(n: int) -> np.ndarray:
        return _assemble_stopped(
            _block_pieces(coeffs, seq.a(n), f.resolution), profile, f.cells
        )

    scale = 2.0 / float(1 << (2 * m))
    head_acc = np.zeros(f.cells)
    for n in range(1, (1 << m) + 1):
        head_acc += stopped(n)
    head_l1 = scale * _l2_sq(head_acc)  # L1 norm of the squared head term

    tail_acc = np.zeros(f.cells)
    tail_best = np.zeros(f.cells)  # N = 2^m contributes an empty tail
    for n in range((1 << m) + 1, (1 << (m + 1))):
        tail_acc += stopped(n)
        np.maximum(tail_best, np.square(tail_acc), out=tail_best)
    tail_l1 = scale * float(tail_best.sum()) / f.cells

    reference = 2.0 ** (-m * (1.0 - delta)) * lam * f.l1_norm()
    return ShellDiagnostics(head_l1, tail_l1, reference)


class WeakTypeRow(NamedTuple):
    """One level-set measurement: threshold, measure, and their product over ||f||_1."""

    threshold: float
    measure: float
    ratio: float


def weak_type_scan(
    g: StepFunction, norm_f: float, thresholds
) -> list[WeakTypeRow]:
    """Exact level-set measures of g across a threshold grid.

    ``measure`` is the fraction of rank-M cells where g exceeds the threshold
    (an exact dyadic rational), ``ratio`` is threshold * measure / norm_f; the
    grid maximum of the ratio is the empirical weak-type constant of the
    operator that produced g.
    """
    if not norm_f > 0:
        raise ArgumentError(f"reference norm must be positive, got {norm_f!r}")
    grid = [float(t) for t in thresholds]
    if not grid:
        raise ArgumentError("threshold grid must not be empty")
    if any(t <= 0 for t in grid):
        raise ArgumentError("thresholds must all be positive")
    rows = []
    for lam in grid:
        measure = float(np.count_nonzero(g.values > lam)) / g.cells
        rows.append(WeakTypeRow(lam, measure, lam * measure / norm_f))
    return rows
