"""Dyadic-group analysis on step functions.

Everything in this package works with functions on [0, 1) that are constant on
the 2^M half-open dyadic cells of rank M; cell j is [j/2^M, (j+1)/2^M).  The
first M binary digits x_0 x_1 ... x_{M-1} of any point in cell j are the bits
of j read from the most significant end, so digitwise arithmetic on points
becomes bit arithmetic on cell indices.

The Walsh functions w_n = prod_j r_j^{n_j} (products of Rademacher signs
r_j(x) = (-1)^{x_j}) are an orthonormal basis of characters for digitwise
addition.  ``analyze`` returns true integral coefficients f^(k) = int f w_k,
so ``synthesize . analyze`` is the identity; both run in O(M 2^M) through a
fast Walsh-Hadamard butterfly plus a bit-reversal permutation that converts
between the transform's natural output order and the Walsh index order.

Conventions fixed here and relied on by the rest of the package:

* analysis divides by 2^M, synthesis does not;
* D_0 = 0 and S_0 f = 0 (empty sums);
* all values are float64 and every function value must be finite.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ResolutionError

#: Largest supported resolution: 2^22 cells is 32 MB per function, which keeps
#: the exhaustive verification suites fast while leaving room for convergence
#: experiments.
MAX_RESOLUTION = 22


def _check_resolution(resolution: int) -> int:
    if not isinstance(resolution, (int, np.integer)):
        raise ArgumentError(f"resolution must be an integer, got {resolution!r}")
    if not 0 <= resolution <= MAX_RESOLUTION:
        raise ResolutionError(
            f"resolution {resolution} outside supported range [0, {MAX_RESOLUTION}]"
        )
    return int(resolution)


@functools.lru_cache(maxsize=None)
def _bit_reverse(resolution: int) -> np.ndarray:
    """Index permutation that reverses the lowest ``resolution`` bits.

    Sends a cell index to the integer whose bit t is the cell's t-th binary
    digit; it is an involution and converts between Hadamard (natural) and
    Walsh coefficient order.
    """
    idx = np.arange(1 << resolution, dtype=np.int64)
    rev = np.zeros_like(idx)
    for t in range(resolution):
        rev |= ((idx >> t) & 1) << (resolution - 1 - t)
    rev.setflags(write=False)
    return rev


def _fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    Returns a new array; F[s] = sum_j f(j) (-1)^{popcount(j & s)}.  Applying
    it twice multiplies by the length, so the same butterfly serves analysis
    and synthesis.
    """
    out = np.array(values, dtype=np.float64, copy=True)
    size = out.shape[-1]
    flat = out.reshape(-1, size)
    half = 1
    while half < size:
        pairs = flat.reshape(-1, 2 * half)
        left = pairs[:, :half].copy()
        np.add(left, pairs[:, half:], out=pairs[:, :half])
        np.subtract(left, pairs[:, half:], out=pairs[:, half:])
        half *= 2
    return out


def _sign_pattern(mask: int, resolution: int) -> np.ndarray:
    """(-1)^{popcount(j & mask)} over all cell indices j, as float64."""
    j = np.arange(1 << resolution, dtype=np.int64)
    return 1.0 - 2.0 * (np.bitwise_count(j & mask) & 1)


def _synth_values(coeffs: np.ndarray, resolution: int) -> np.ndarray:
    """Raw synthesis: cell values of sum_k coeffs[k] w_k."""
    return _fwht(coeffs[_bit_reverse(resolution)])


def _analyze_values(values: np.ndarray, resolution: int) -> np.ndarray:
    """Raw analysis: Walsh coefficients of the given cell values."""
    return _fwht(values)[_bit_reverse(resolution)] / (1 << resolution)


def _cell_means(values: np.ndarray, resolution: int, m: int) -> np.ndarray:
    """Average over rank-m cells, broadcast back to full resolution."""
    width = 1 << (resolution - m)
    if width == 1:
        return values.copy()
    means = values.reshape(-1, width).mean(axis=1)
    return np.repeat(means, width)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """A real function on [0, 1) constant on the 2^M dyadic cells of rank M."""

    resolution: int
    values: np.ndarray

    def __post_init__(self):
        res = _check_resolution(self.resolution)
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (1 << res,):
            raise ArgumentError(
                f"need exactly 2^{res} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("function values must all be finite")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "values", vals)

    @property
    def cells(self) -> int:
        return 1 << self.resolution

    @classmethod
    def zeros(cls, resolution: int) -> "StepFunction":
        return cls(resolution, np.zeros(1 << _check_resolution(resolution)))

    def integral(self) -> float:
        return float(self.values.sum()) / self.cells

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum()) / self.cells

    def l2_norm_sq(self) -> float:
        return float(np.square(self.values).sum()) / self.cells

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _match(self, other: "StepFunction") -> None:
        if self.resolution != other.resolution:
            raise ArgumentError(
                f"resolution mismatch: {self.resolution} vs {other.resolution}"
            )

    def __add__(self, other: "StepFunction") -> "StepFunction":
        self._match(other)
        return StepFunction(self.resolution, self.values + other.values)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        self._match(other)
        return StepFunction(self.resolution, self.values - other.values)

    def __neg__(self) -> "StepFunction":
        return StepFunction(self.resolution, -self.values)

    def __mul__(self, other) -> "StepFunction":
        if isinstance(other, StepFunction):
            self._match(other)
            return StepFunction(self.resolution, self.values * other.values)
        return StepFunction(self.resolution, self.values * float(other))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"resolution": self.resolution, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "StepFunction":
        try:
            return cls(int(payload["resolution"]), np.asarray(payload["values"]))
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed step-function payload: {exc}") from exc


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Walsh coefficients of a step function; coeffs[k] = int f w_k."""

    resolution: int
    coeffs: np.ndarray

    def __post_init__(self):
        res = _check_resolution(self.resolution)
        vals = np.asarray(self.coeffs, dtype=np.float64)
        if vals.shape != (1 << res,):
            raise ArgumentError(
                f"need exactly 2^{res} coefficients, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("coefficients must all be finite")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "coeffs", vals)

    def to_dict(self) -> dict:
        return {"resolution": self.resolution, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "Spectrum":
        try:
            return cls(int(payload["resolution"]), np.asarray(payload["coeffs"]))
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed spectrum payload: {exc}") from exc


@dataclass(frozen=True)
class BitProfile:
    """Top and bottom set-bit positions of a positive integer."""

    n: int
    top: int
    bottom: int


def dyadic_add(j: int, k: int, resolution: int) -> int:
    """Cell index of x (+) y for x in cell j and y in cell k.

    Digitwise addition of points is XOR on rank-M cell indices.
    """
    cells = 1 << _check_resolution(resolution)
    if not (0 <= j < cells and 0 <= k < cells):
        raise ArgumentError(f"cell indices {j}, {k} out of range [0, {cells})")
    return j ^ k


def bit_profile(n: int) -> BitProfile:
    """Positions of the highest and lowest set bit of n >= 1."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ArgumentError(f"bit profile requires a positive integer, got {n!r}")
    n = int(n)
    return BitProfile(n, n.bit_length() - 1, (n & -n).bit_length() - 1)


def truncate(n: int, j: int) -> int:
    """Zero all bits of n below position j."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ArgumentError(f"truncate requires a positive integer, got {n!r}")
    if j < 0:
        raise ArgumentError(f"bit position must be nonnegative, got {j}")
    return (int(n) >> j) << j


def walsh_eval(n: int, j: int, resolution: int) -> int:
    """Value (+1 or -1) of the n-th Walsh function on rank-M cell j."""
    cells = 1 << _check_resolution(resolution)
    if not 0 <= j < cells:
        raise ArgumentError(f"cell index {j} out of range [0, {cells})")
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ArgumentError(f"Walsh index must be a nonnegative integer, got {n!r}")
    if n >= cells:
        raise ResolutionError(
            f"Walsh function {n} is not constant on rank-{resolution} cells"
        )
    digits = int(_bit_reverse(resolution)[j])
    return 1 - 2 * ((int(n) & digits).bit_count() & 1)


def walsh_values(n: int, resolution: int) -> np.ndarray:
    """The n-th Walsh function on every rank-M cell, as a +/-1 float array."""
    cells = 1 << _check_resolution(resolution)
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ArgumentError(f"Walsh index must be a nonnegative integer, got {n!r}")
    if n >= cells:
        raise ResolutionError(
            f"Walsh function {n} is not constant on rank-{resolution} cells"
        )
    return _sign_pattern(int(_bit_reverse(resolution)[n]), resolution)


def analyze(f: StepFunction) -> Spectrum:
    """Walsh coefficients f^(k) = int f w_k for all k < 2^M."""
    return Spectrum(f.resolution, _analyze_values(f.values, f.resolution))


def synthesize(s: Spectrum) -> StepFunction:
    """Exact inverse of ``analyze``: cell values of sum_k coeffs[k] w_k."""
    return StepFunction(s.resolution, _synth_values(s.coeffs, s.resolution))


def dirichlet_kernel(n: int, resolution: int) -> StepFunction:
    """Sum of the first n Walsh functions (zero function for n = 0)."""
    cells = 1 << _check_resolution(resolution)
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ArgumentError(f"kernel order must be a nonnegative integer, got {n!r}")
    if n > cells:
        raise ResolutionError(
            f"kernel order {n} exceeds the 2^{resolution} representable frequencies"
        )
    coeffs = np.zeros(cells)
    coeffs[:n] = 1.0
    return StepFunction(resolution, _synth_values(coeffs, resolution))


def fejer_kernel(n: int, resolution: int) -> StepFunction:
    """Arithmetic mean of the Dirichlet kernels of orders 1..n.

    Spectrally (n - k)/n at frequency k < n, which is what convolving with it
    must produce.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ArgumentError(f"mean of kernels needs n >= 1, got {n!r}")
    cells = 1 << _check_resolution(resolution)
    if n > cells:
        raise ResolutionError(
            f"kernel order {n} exceeds the 2^{resolution} representable frequencies"
        )
    coeffs = np.zeros(cells)
    coeffs[:n] = (n - np.arange(n, dtype=np.float64)) / n
    return StepFunction(resolution, _synth_values(coeffs, resolution))


def partial_sum(f: StepFunction, n: int) -> StepFunction:
    """Truncation of the Walsh expansion of f to frequencies below n."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ArgumentError(f"partial-sum order must be nonnegative, got {n!r}")
    if n > f.cells:
        raise ResolutionError(
            f"partial-sum order {n} exceeds the 2^{f.resolution} representable"
            " frequencies"
        )
    coeffs = _analyze_values(f.values, f.resolution)
    coeffs[n:] = 0.0
    return StepFunction(f.resolution, _synth_values(coeffs, f.resolution))


def cond_expect(f: StepFunction, m: int) -> StepFunction:
    """Conditional expectation onto rank-m cells (averages within each cell).

    Coincides with the partial sum of order 2^m.
    """
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise ArgumentError(f"conditioning rank must be nonnegative, got {m!r}")
    if m > f.resolution:
        raise ResolutionError(
            f"conditioning rank {m} exceeds resolution {f.resolution}"
        )
    return StepFunction(f.resolution, _cell_means(f.values, f.resolution, m))


def dyadic_convolve(f: StepFunction, g: StepFunction) -> StepFunction:
    """Convolution over the dyadic group: (f*g)(y) = int f(x (+) y) g(x) dx.

    Computed spectrally; the transform turns it into a coefficient product.
    """
    if f.resolution != g.resolution:
        raise ArgumentError(
            f"resolution mismatch: {f.resolution} vs {g.resolution}"
        )
    fh = _analyze_values(f.values, f.resolution)
    gh = _analyze_values(g.values, g.resolution)
    return StepFunction(f.resolution, _synth_values(fh * gh, f.resolution))


def dyadic_maximal(f: StepFunction) -> StepFunction:
    """Dyadic maximal function: per cell, max over m of the rank-m average of |f|.

    On step functions the average at rank M is |f| itself and coarser ranks
    only shrink the scan, so the finite maximum over m = 0..M is exact.
    """
    best = np.abs(f.values)
    level = best
    for _ in range(f.resolution):
        level = level.reshape(-1, 2).mean(axis=1)
        best = np.maximum(best.reshape(level.size, -1), level[:, None]).reshape(-1)
    return StepFunction(f.resolution, best)
