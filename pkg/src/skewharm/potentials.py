"""Model potentials f(x) entering the operator -d^2/dx^2 + x^2 + (i/eps) f(x).

Each potential knows its derivatives up to third order in closed form, its
critical points and values, the closure of its range, and (where meaningful)
the algebraic decay exponent at infinity. These quantities drive grid
selection, scan windows, regime classification and the decay-functional
recipes, so they are part of the contract and are unit-tested against finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma_fn, hyp2f1

__all__ = [
    "Potential",
    "PowerDecay",
    "DoubleBump",
    "Quadratic",
    "Linear",
    "SmoothedLinear",
    "Constant",
    "Tabulated",
    "Offset",
    "Negated",
    "from_cli_name",
]

_INF = math.inf


class Potential:
    """A smooth real potential with closed-form derivatives of order 0..3.

    Subclasses implement ``__call__(x, order)`` vectorised over numpy arrays
    and override the metadata methods used by the rest of the library.
    """

    kind: str = "abstract"
    #: exponent k such that |x|^k f(x) stays bounded and nonzero at infinity
    #: (None when f does not decay algebraically)
    decay_exponent: float | None = None
    #: True when f(0) = 1 is the only critical value, the maximum there is
    #: nondegenerate, and |x|^k f(x) -> 1; the semiclassical eigenvalue
    #: predictions are derived under exactly these normalisations.
    normalized_single_maximum: bool = False

    def __call__(self, x, order: int = 0):
        raise NotImplementedError

    def critical_points(self) -> tuple[float, ...]:
        return ()

    def critical_values(self) -> tuple[float, ...]:
        return tuple(sorted({float(self(np.asarray(c))) for c in self.critical_points()}))

    def limits(self) -> tuple[float, float]:
        """(lim at -inf, lim at +inf); entries may be infinite."""
        raise NotImplementedError

    def range_closure(self) -> tuple[float, float]:
        """Closure of f(R) as an interval [lo, hi]; entries may be infinite."""
        lo, hi = self.limits()
        vals = list(self.critical_values()) + [lo, hi]
        return (min(vals), max(vals))

    def derivative_sup(self, order: int) -> float:
        """sup over R of |f^(order)|; may be inf for unbounded derivatives."""
        return _sampled_sup(lambda t: self(t, order))

    def curvature_sups(self) -> tuple[float, float]:
        """(K2, K3) = sup|f''|, sup|f'''| used by the decay recipes."""
        return (self.derivative_sup(2), self.derivative_sup(3))


def _sampled_sup(fun, xmax=80.0, n=160001):
    """Numeric sup of |fun| on [-xmax, xmax] with one local refinement pass."""
    x = np.linspace(-xmax, xmax, n)
    y = np.abs(fun(x))
    i = int(np.argmax(y))
    lo = x[max(i - 2, 0)]
    hi = x[min(i + 2, n - 1)]
    xf = np.linspace(lo, hi, 20001)
    return float(max(y[i], np.abs(fun(xf)).max()))


def _check_order(order):
    if order not in (0, 1, 2, 3):
        raise ValueError("derivative order must be 0..3, got %r" % (order,))


@dataclass(frozen=True)
class PowerDecay(Potential):
    """f(x) = (1 + x^2)^(-k/2): a single nondegenerate maximum f(0) = 1 and
    algebraic decay |x|^k f -> 1. The reference example for the semiclassical
    eigenvalue predictions."""

    k: float = 4.0
    kind: str = field(default="power-decay", init=False)
    normalized_single_maximum = True

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("decay exponent k must be positive")

    @property
    def decay_exponent(self):
        return self.k

    def __call__(self, x, order: int = 0):
        _check_order(order)
        x = np.asarray(x, dtype=float)
        k = self.k
        s = 1.0 + x * x
        if order == 0:
            return s ** (-k / 2.0)
        if order == 1:
            return -k * x * s ** (-(k + 2.0) / 2.0)
        if order == 2:
            return -k * (1.0 - (k + 1.0) * x * x) * s ** (-(k + 4.0) / 2.0)
        return k * (k + 2.0) * x * (3.0 - (k + 1.0) * x * x) * s ** (-(k + 6.0) / 2.0)

    def critical_points(self):
        return (0.0,)

    def limits(self):
        return (0.0, 0.0)


@dataclass(frozen=True)
class DoubleBump(Potential):
    """f(x) = (1 + 3x^2)/(1 + x^2/3)^3: two symmetric maxima f(+-1) = 27/16, a
    local minimum f(0) = 1, and quartic decay x^4 f -> 81. Exercises multiple
    resolvent spikes and exponentially close spike pairs."""

    kind: str = field(default="double-bump", init=False)
    decay_exponent = 4.0

    def __call__(self, x, order: int = 0):
        _check_order(order)
        x = np.asarray(x, dtype=float)
        D = 1.0 + x * x / 3.0
        if order == 0:
            return (1.0 + 3.0 * x * x) / D**3
        if order == 1:
            return 4.0 * x * (1.0 - x * x) / D**4
        if order == 2:
            return 4.0 * (1.0 - 16.0 * x * x / 3.0 + 5.0 * x**4 / 3.0) / D**5
        return -(8.0 / 3.0) * x * (21.0 - 94.0 * x * x / 3.0 + 5.0 * x**4) / D**6

    def critical_points(self):
        return (-1.0, 0.0, 1.0)

    def limits(self):
        return (0.0, 0.0)


@dataclass(frozen=True)
class Quadratic(Potential):
    """f(x) = x^2; the operator is then a complex-frequency oscillator with
    closed-form spectrum (2n+1) sqrt(1 + i/eps)."""

    kind: str = field(default="quadratic", init=False)

    def __call__(self, x, order: int = 0):
        _check_order(order)
        x = np.asarray(x, dtype=float)
        if order == 0:
            return x * x
        if order == 1:
            return 2.0 * x
        if order == 2:
            return np.full_like(x, 2.0)
        return np.zeros_like(x)

    def critical_points(self):
        return (0.0,)

    def limits(self):
        return (_INF, _INF)

    def derivative_sup(self, order):
        return (_INF, _INF, 2.0, 0.0)[order]


@dataclass(frozen=True)
class Linear(Potential):
    """f(x) = x; completing the square moves the spectrum to 2n+1+1/(4 eps^2)
    exactly, which pins the spectral-bound code to a closed form."""

    kind: str = field(default="linear", init=False)

    def __call__(self, x, order: int = 0):
        _check_order(order)
        x = np.asarray(x, dtype=float)
        if order == 0:
            return x.copy()
        if order == 1:
            return np.ones_like(x)
        return np.zeros_like(x)

    def limits(self):
        return (-_INF, _INF)

    def derivative_sup(self, order):
        return (_INF, 1.0, 0.0, 0.0)[order]


@dataclass(frozen=True)
class SmoothedLinear(Potential):
    """f(x) = integral_0^x (1+y^2)^(-(k+1)/2) dy: strictly increasing, no
    critical points, f' decaying like |x|^(-k-1). Evaluated through the Gauss
    hypergeometric representation f = x 2F1(1/2, (k+1)/2; 3/2; -x^2)."""

    k: float = 1.0
    kind: str = field(default="smoothed-linear", init=False)

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("decay exponent k must be positive")

    @property
    def plateau(self) -> float:
        """f(+inf) = sqrt(pi) Gamma(k/2) / (2 Gamma((k+1)/2))."""
        k = self.k
        return math.sqrt(math.pi) * _gamma_fn(k / 2.0) / (2.0 * _gamma_fn((k + 1.0) / 2.0))

    def __call__(self, x, order: int = 0):
        _check_order(order)
        x = np.asarray(x, dtype=float)
        k = self.k
        s = 1.0 + x * x
        if order == 0:
            return x * hyp2f1(0.5, (k + 1.0) / 2.0, 1.5, -x * x)
        if order == 1:
            return s ** (-(k + 1.0) / 2.0)
        if order == 2:
            return -(k + 1.0) * x * s ** (-(k + 3.0) / 2.0)
        return -(k + 1.0) * (1.0 - (k + 2.0) * x * x) * s ** (-(k + 5.0) / 2.0)

    def limits(self):
        return (-self.plateau, self.plateau)


@dataclass(frozen=True)
class Constant(Potential):
    """f(x) = c; the operator is the harmonic oscillator shifted by ic/eps,
    so every spectral quantity is known exactly."""

    c: float = 1.0
    kind: str = field(default="constant", init=False)

    def __call__(self, x, order: int = 0):
        _check_order(order)
        x = np.asarray(x, dtype=float)
        if order == 0:
            return np.full_like(x, self.c)
        return np.zeros_like(x)

    def critical_points(self):
        return (0.0,)

    def limits(self):
        return (self.c, self.c)

    def derivative_sup(self, order):
        return abs(self.c) if order == 0 else 0.0


class Tabulated(Potential):
    """Cubic-spline interpolant of sampled values, with natural boundary.

    Derivatives come from the spline; metadata (range, critical points) is
    estimated from a dense resampling. Intended for user-supplied profiles.
    """

    kind = "tabulated"

    def __init__(self, xs, fs):
        from scipy.interpolate import CubicSpline

        xs = np.asarray(xs, dtype=float)
        fs = np.asarray(fs, dtype=float)
        if xs.ndim != 1 or xs.shape != fs.shape or len(xs) < 4:
            raise ValueError("need matching 1-d arrays with at least 4 samples")
        self._spline = CubicSpline(xs, fs, bc_type="natural")
        self._lo, self._hi = float(xs[0]), float(xs[-1])

    def __call__(self, x, order: int = 0):
        _check_order(order)
        x = np.clip(np.asarray(x, dtype=float), self._lo, self._hi)
        return self._spline(x, nu=order)

    def critical_points(self):
        r = self._spline.derivative().roots(extrapolate=False)
        return tuple(float(t) for t in np.atleast_1d(r))

    def limits(self):
        return (float(self._spline(self._lo)), float(self._spline(self._hi)))

    def range_closure(self):
        t = np.linspace(self._lo, self._hi, 4001)
        y = self._spline(t)
        return (float(y.min()), float(y.max()))

    def derivative_sup(self, order):
        t = np.linspace(self._lo, self._hi, 40001)
        return float(np.abs(self._spline(t, nu=order)).max())


@dataclass(frozen=True)
class Offset(Potential):
    """base potential plus a real constant; used for shift-covariance checks."""

    base: Potential
    c: float
    kind: str = field(default="offset", init=False)

    def __call__(self, x, order: int = 0):
        y = self.base(x, order)
        return y + self.c if order == 0 else y

    def critical_points(self):
        return self.base.critical_points()

    def critical_values(self):
        return tuple(v + self.c for v in self.base.critical_values())

    def limits(self):
        lo, hi = self.base.limits()
        return (lo + self.c, hi + self.c)

    def derivative_sup(self, order):
        s = self.base.derivative_sup(order)
        return s + abs(self.c) if order == 0 else s


@dataclass(frozen=True)
class Negated(Potential):
    """-f; conjugating the operator flips the sign of the spectral parameter."""

    base: Potential
    kind: str = field(default="negated", init=False)

    def __call__(self, x, order: int = 0):
        return -self.base(x, order)

    def critical_points(self):
        return self.base.critical_points()

    def critical_values(self):
        return tuple(sorted(-v for v in self.base.critical_values()))

    def limits(self):
        lo, hi = self.base.limits()
        return (-hi, -lo)

    def range_closure(self):
        lo, hi = self.base.range_closure()
        return (-hi, -lo)

    def derivative_sup(self, order):
        return self.base.derivative_sup(order)


def from_cli_name(name: str, k: float = 4.0, c: float = 1.0) -> Potential:
    """Map command-line potential names to instances.

    fex   -> PowerDecay(k)       bump -> DoubleBump()
    x2    -> Quadratic()         x    -> Linear()
    sl    -> SmoothedLinear(k)   const-> Constant(c)
    """
    table = {
        "fex": lambda: PowerDecay(k),
        "bump": DoubleBump,
        "x2": Quadratic,
        "x": Linear,
        "sl": lambda: SmoothedLinear(k),
        "const": lambda: Constant(c),
    }
    try:
        return table[name]()
    except KeyError:
        raise ValueError("unknown potential %r (choose from %s)" % (name, sorted(table)))
