"""Two-sided decompositions of the Dirichlet kernel and their frequency blocks.

For n >= 1 write |n| for its top set-bit position and m(n) for its bottom one.
Over the zero bits i of n between m(n) and |n|, the kernel D_n splits as

    D_n = D_{2^{|n|+1}} - w_n D_{2^{m(n)}} + sum_i d_{n,i},

where every modified kernel d_{n,i} = w_n (D_{2^i} - D_{2^{i+1}}) collapses to
the closed form -w_{n^{(i+1)} + 2^i} D_{2^i} (``n^{(i+1)}`` is n with bits
below i+1 cleared).  Each d_{n,i} therefore carries coefficient -1 on exactly
one run of 2^i consecutive frequencies, its block; all blocks of one n are
pairwise disjoint, ordered by i, and live inside the dyadic frequency shell
[2^{|n|}, 2^{|n|+1}).

Convolving the split with a function gives the matching split of its partial
sums, which is what the averaging operators build on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    StepFunction,
    _analyze_values,
    _cell_means,
    _check_resolution,
    _synth_values,
    bit_profile,
    cond_expect,
    dirichlet_kernel,
    truncate,
    walsh_values,
)
from .errors import ArgumentError, IdentityError, ResolutionError

#: Below this absolute size a Walsh coefficient counts as zero.  Coefficients
#: of the objects built here are integers or dyadic rationals, so any genuine
#: nonzero is at least 2^-MAX_RESOLUTION, far above the threshold.
SUPPORT_TOL = 1e-10

#: Agreement required between the defining product and the closed form of a
#: modified kernel (an exact identity; both sides are computed in exact sign
#: arithmetic, so any excess signals a real bug).
CLOSED_FORM_TOL = 1e-10


def _check_position(n: int, i: int) -> "bit_profile":
    profile = bit_profile(n)
    if not isinstance(i, (int, np.integer)) or not 0 <= i < profile.top:
        raise ArgumentError(
            f"bit position {i!r} must satisfy 0 <= i < {profile.top} for n={n}"
        )
    return profile


def lambda_coeff(n: int, i: int) -> int:
    """1 when bit i of n is a zero bit strictly between m(n) and |n|, else 0."""
    profile = _check_position(n, i)
    return int(profile.bottom <= i and not (int(n) >> i) & 1)


@dataclass(frozen=True)
class Block:
    """The run of 2^i consecutive frequencies carried by a modified kernel."""

    n: int
    i: int
    lo: int
    hi_exclusive: int

    def __post_init__(self):
        top = bit_profile(self.n).top
        if self.hi_exclusive - self.lo != 1 << self.i:
            raise ArgumentError("block width must be 2^i")
        if self.lo < 1 << top or self.hi_exclusive > 1 << (top + 1):
            raise ArgumentError("block must sit inside the top dyadic shell of n")

    @property
    def width(self) -> int:
        return self.hi_exclusive - self.lo

    @property
    def frequencies(self) -> range:
        return range(self.lo, self.hi_exclusive)


def block(n: int, i: int) -> Block:
    """Frequency block at bit position i: [n^{(i+1)} + 2^i, n^{(i+1)} + 2^{i+1})."""
    _check_position(n, i)
    base = truncate(n, i + 1)
    return Block(int(n), int(i), base + (1 << i), base + (1 << (i + 1)))


def blocks(n: int) -> list[Block]:
    """Blocks of all active bit positions of n, in increasing i order."""
    top = bit_profile(n).top
    return [block(n, i) for i in range(top) if lambda_coeff(n, i)]


def block_mask(n: int, resolution: int) -> np.ndarray:
    """Boolean frequency mask covering the union of all blocks of n."""
    _check_resolution(resolution)
    if bit_profile(n).top >= resolution:
        raise ResolutionError(
            f"blocks of {n} reach past the 2^{resolution} representable frequencies"
        )
    mask = np.zeros(1 << resolution, dtype=bool)
    for blk in blocks(n):
        mask[blk.lo : blk.hi_exclusive] = True
    return mask


def _power_kernel_values(m: int, resolution: int) -> np.ndarray:
    """D_{2^m} in closed form: 2^m on [0, 2^-m), zero elsewhere."""
    values = np.zeros(1 << resolution)
    values[: 1 << (resolution - m)] = float(1 << m)
    return values


def d_kernel(n: int, i: int, resolution: int) -> StepFunction:
    """Modified kernel at bit position i of n (zero when the position is inactive).

    For active positions the defining product and the closed form are both
    evaluated and must agree; the closed form is returned.
    """
    profile = _check_position(n, i)
    _check_resolution(resolution)
    if profile.top >= resolution:
        raise ResolutionError(
            f"kernel of {n} needs resolution > {profile.top}, got {resolution}"
        )
    if not lambda_coeff(n, i):
        return StepFunction.zeros(resolution)
    defining = walsh_values(n, resolution) * (
        _power_kernel_values(i, resolution) - _power_kernel_values(i + 1, resolution)
    )
    closed = -walsh_values(truncate(n, i + 1) + (1 << i), resolution)
    closed *= _power_kernel_values(i, resolution)
    deviation = float(np.max(np.abs(defining - closed)))
    if deviation > CLOSED_FORM_TOL:
        raise IdentityError(
            f"modified kernel ({n}, {i}): defining product and closed form"
            f" differ by {deviation:.3e}"
        )
    return StepFunction(resolution, closed)


@dataclass(frozen=True)
class DirichletDecomposition:
    """D_n split into head, modulated tail and modified-kernel parts.

    ``residual_sup`` records the sup-norm gap between D_n and
    head - modulated_tail + sum of parts.
    """

    n: int
    head: StepFunction
    modulated_tail: StepFunction
    parts: tuple[tuple[int, StepFunction], ...]
    residual_sup: float


def decompose_dirichlet(n: int, resolution: int) -> DirichletDecomposition:
    """Assemble the kernel split of D_n and record its residual."""
    profile = bit_profile(n)
    _check_resolution(resolution)
    if profile.top + 1 > resolution:
        raise ResolutionError(
            f"splitting D_{n} needs resolution >= {profile.top + 1},"
            f" got {resolution}"
        )
    head = StepFunction(resolution, _power_kernel_values(profile.top + 1, resolution))
    tail = StepFunction(
        resolution,
        walsh_values(n, resolution) * _power_kernel_values(profile.bottom, resolution),
    )
    parts = tuple(
        (i, d_kernel(n, i, resolution))
        for i in range(profile.top)
        if lambda_coeff(n, i)
    )
    assembled = head.values - tail.values
    for _, part in parts:
        assembled = assembled + part.values
    residual = float(
        np.max(np.abs(dirichlet_kernel(n, resolution).values - assembled))
    )
    return DirichletDecomposition(int(n), head, tail, parts, residual)


def dirichlet_standard_identity(n: int, resolution: int) -> float:
    """Sup-norm residual of the one-sided kernel identity.

    Evaluates w_n sum_i n_i (D_{2^{i+1}} - D_{2^i}) from closed-form power
    kernels only, so it is an independent check on ``dirichlet_kernel`` and on
    ``decompose_dirichlet``.
    """
    profile = bit_profile(n)
    _check_resolution(resolution)
    if profile.top + 1 > resolution:
        raise ResolutionError(
            f"identity for D_{n} needs resolution >= {profile.top + 1},"
            f" got {resolution}"
        )
    acc = np.zeros(1 << resolution)
    for i in range(profile.top + 1):
        if (int(n) >> i) & 1:
            acc += _power_kernel_values(i + 1, resolution)
            acc -= _power_kernel_values(i, resolution)
    rhs = walsh_values(n, resolution) * acc
    return float(np.max(np.abs(dirichlet_kernel(n, resolution).values - rhs)))


def decompose_partial_sum(
    f: StepFunction, n: int
) -> tuple[StepFunction, StepFunction, StepFunction]:
    """Split the order-n partial sum of f into its three components.

    Returns ``(head, modulated, block_tail)`` with head the conditional
    expectation at rank |n|+1, modulated the w_n-twisted expectation at rank
    m(n), and block_tail the sum of convolutions with the modified kernels;
    the partial sum equals head - modulated + block_tail.
    """
    profile = bit_profile(n)
    if profile.top + 1 > f.resolution:
        raise ResolutionError(
            f"splitting the order-{n} partial sum needs resolution >="
            f" {profile.top + 1}, got {f.resolution}"
        )
    signs = walsh_values(n, f.resolution)
    head = cond_expect(f, profile.top + 1)
    modulated = StepFunction(
        f.resolution,
        signs * _cell_means(f.values * signs, f.resolution, profile.bottom),
    )
    coeffs = _analyze_values(f.values, f.resolution)
    masked = np.where(block_mask(n, f.resolution), -coeffs, 0.0)
    tail = StepFunction(f.resolution, _synth_values(masked, f.resolution))
    return head, modulated, tail


def spectrum_support(f: StepFunction, tol: float = SUPPORT_TOL) -> set[int]:
    """Frequencies whose Walsh coefficient exceeds ``tol`` in absolute value."""
    if tol <= 0:
        raise ArgumentError(f"support threshold must be positive, got {tol}")
    coeffs = _analyze_values(f.values, f.resolution)
    return {int(k) for k in np.nonzero(np.abs(coeffs) > tol)[0]}
