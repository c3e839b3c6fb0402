"""Built-in test functions for the experiment drivers.

The spike family 2^k 1_{[0, 2^-k)} has unit mass and growing peak, the stress
shape for weak-type measurements.  ``random_step`` draws a random dyadic step
function whose steps live at a coarser rank r <= M: ``sparsity`` in (0, 1] is
the fraction r/M of the full dyadic depth the steps occupy.  Random inputs at
full depth are spectrally flat all the way to the resolution ceiling, which no
finite-resolution averaging can converge on, so the coarse default (0.5)
matches how an integrable function is sampled onto the grid in the first
place; pass sparsity=1.0 to get the flat stress case deliberately.
"""

from __future__ import annotations

import numpy as np

from .core import StepFunction, _check_resolution, _synth_values
from .errors import ArgumentError, ResolutionError

BUILTIN_NAMES = ("indicator", "spike", "sawtooth", "walsh_poly", "random_step")


def indicator(k: int, resolution: int) -> StepFunction:
    """Indicator of the dyadic interval [0, 2^-k)."""
    _check_resolution(resolution)
    if not isinstance(k, (int, np.integer)) or not 0 <= k < resolution:
        raise ArgumentError(
            f"indicator rank must satisfy 0 <= k < {resolution}, got {k!r}"
        )
    values = np.zeros(1 << resolution)
    values[: 1 << (resolution - k)] = 1.0
    return StepFunction(resolution, values)


def spike(k: int, resolution: int) -> StepFunction:
    """Unit-mass spike 2^k 1_{[0, 2^-k)}."""
    base = indicator(k, resolution)
    return StepFunction(resolution, base.values * float(1 << k))


def sawtooth(resolution: int) -> StepFunction:
    """Cell midpoints: value (j + 1/2)/2^M on cell j."""
    cells = 1 << _check_resolution(resolution)
    return StepFunction(resolution, (np.arange(cells) + 0.5) / cells)


def walsh_poly(coeffs, resolution: int) -> StepFunction:
    """Finite Walsh expansion with the given leading coefficients."""
    cells = 1 << _check_resolution(resolution)
    arr = np.asarray(coeffs, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ArgumentError("need a nonempty coefficient list")
    if arr.size > cells:
        raise ResolutionError(
            f"{arr.size} coefficients exceed the 2^{resolution} representable"
            " frequencies"
        )
    spec = np.zeros(cells)
    spec[: arr.size] = arr
    return StepFunction(resolution, _synth_values(spec, resolution))


def random_step(
    resolution: int,
    seed: int = 0,
    sparsity: float = 0.5,
    rng: np.random.Generator | None = None,
) -> StepFunction:
    """Random dyadic step function with steps at rank round(sparsity * M)."""
    _check_resolution(resolution)
    if not 0.0 < sparsity <= 1.0:
        raise ArgumentError(f"sparsity must lie in (0, 1], got {sparsity!r}")
    if rng is None:
        rng = np.random.default_rng(seed)
    rank = min(resolution, max(0, round(sparsity * resolution)))
    steps = rng.standard_normal(1 << rank)
    return StepFunction(resolution, np.repeat(steps, 1 << (resolution - rank)))


def builtin_function(spec: str, resolution: int, seed: int = 0) -> StepFunction:
    """Parse a colon-separated builtin description into a step function.

    Examples: ``spike:6``, ``indicator:0``, ``sawtooth``, ``walsh_poly:1,0,2.5``,
    ``random_step``, ``random_step:0.75``.  A trailing ``:unit`` rescales to
    unit L^1 mass.
    """
    parts = [p for p in str(spec).strip().split(":") if p != ""]
    if not parts:
        raise ArgumentError("empty function description")
    normalize = False
    if parts[-1] == "unit":
        normalize = True
        parts = parts[:-1]
    if not parts:
        raise ArgumentError(f"function description {spec!r} has no name")
    name, args = parts[0], parts[1:]

    if name == "indicator" or name == "spike":
        if len(args) != 1:
            raise ArgumentError(f"{name} takes exactly one rank argument")
        k = int(args[0])
        f = indicator(k, resolution) if name == "indicator" else spike(k, resolution)
    elif name == "sawtooth":
        if args:
            raise ArgumentError("sawtooth takes no arguments")
        f = sawtooth(resolution)
    elif name == "walsh_poly":
        if len(args) != 1:
            raise ArgumentError("walsh_poly takes one comma-separated coefficient list")
        coeffs = [float(c) for c in args[0].split(",") if c != ""]
        f = walsh_poly(coeffs, resolution)
    elif name == "random_step":
        if len(args) > 1:
            raise ArgumentError("random_step takes at most a sparsity argument")
        sparsity = float(args[0]) if args else 0.5
        f = random_step(resolution, seed=seed, sparsity=sparsity)
    else:
        raise ArgumentError(f"unknown builtin function {name!r}")

    if normalize:
        mass = f.l1_norm()
        if mass <= 0:
            raise ArgumentError(f"cannot normalize the zero function {spec!r}")
        f = f * (1.0 / mass)
    return f


def default_corpus(resolution: int, seed: int = 0) -> list[tuple[str, StepFunction]]:
    """The standard mix used by the verification suites.

    Unit-mass spikes at two depths, an indicator, the sawtooth, a fixed
    dyadic-coefficient Walsh polynomial, and two seeded random steps (one
    coarse, one at full depth).
    """
    _check_resolution(resolution)
    if resolution < 8:
        raise ArgumentError(f"the corpus needs resolution >= 8, got {resolution}")
    names = [
        "spike:3",
        "spike:6",
        "indicator:2",
        "sawtooth",
        "walsh_poly:1,0,0.5,0,-2,0,0,3",
        "random_step:0.5",
        "random_step:1.0",
    ]
    return [(name, builtin_function(name, resolution, seed=seed)) for name in names]
