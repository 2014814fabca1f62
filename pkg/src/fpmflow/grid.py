"""Uniform periodic grid on the unit torus with paired physical/spectral views.

The torus is [-1/2, 1/2) with nodes x_j = -1/2 + j/n.  Fields are expanded in
the modes e^{2 pi i k x}, so a Fourier multiplier m(k) acts on the integer
wavenumber k.  Real fields are stored as sample vectors; the half-spectrum
coefficients c_k (k = 0 .. n/2) are cached per field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

ROUNDTRIP_TOL = 1e-12


@dataclass(frozen=True)
class PeriodicGrid:
    """Discretization of the unit torus [-1/2, 1/2) with n equispaced nodes."""

    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 points, got {self.n}")
        if self.n % 2 != 0:
            raise ValueError(f"grid size must be even, got {self.n}")

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -0.5 + np.arange(self.n) / self.n
        x.setflags(write=False)
        return x

    @cached_property
    def dx(self) -> float:
        return 1.0 / self.n

    @cached_property
    def k_half(self) -> np.ndarray:
        """Nonnegative wavenumbers 0 .. n/2 (rfft layout)."""
        k = np.arange(self.n // 2 + 1)
        k.setflags(write=False)
        return k

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full integer wavenumber set {-n/2+1, ..., n/2}."""
        k = np.arange(-self.n // 2 + 1, self.n // 2 + 1)
        k.setflags(write=False)
        return k

    @cached_property
    def _node_phase(self) -> np.ndarray:
        # (-1)^k translates rfft output (origin at x=0 ordering) to true
        # coefficients of e^{2 pi i k x} for nodes starting at x=-1/2
        ph = np.where(self.k_half % 2 == 0, 1.0, -1.0)
        ph.setflags(write=False)
        return ph

    def coefficients(self, values: np.ndarray) -> np.ndarray:
        """Half-spectrum coefficients c_k of the trig interpolant of `values`."""
        return np.fft.rfft(values) / self.n * self._node_phase

    def synthesis(self, coeffs: np.ndarray) -> np.ndarray:
        """Node samples of the field with half-spectrum coefficients `coeffs`."""
        return np.fft.irfft(coeffs * self._node_phase, self.n) * self.n

    def node_index(self, x: float) -> int:
        """Index of the grid node closest to x (wrapped into the torus)."""
        j = round((x + 0.5) * self.n)
        return int(j % self.n)


def make_grid(n_points: int) -> PeriodicGrid:
    return PeriodicGrid(n_points)


@dataclass(frozen=True)
class DensityField:
    """Real scalar samples on a PeriodicGrid with cached spectral coefficients."""

    grid: PeriodicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"values shape {v.shape} does not match grid size {self.grid.n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @cached_property
    def coefficients(self) -> np.ndarray:
        """Coefficients c_k for k = 0 .. n/2; c_0 equals the mean."""
        c = self.grid.coefficients(self.values)
        c.setflags(write=False)
        return c

    @property
    def mean(self) -> float:
        return float(self.values.mean())


def field_from_values(grid: PeriodicGrid, values: np.ndarray) -> DensityField:
    return DensityField(grid, values)


def field_from_function(grid: PeriodicGrid, f) -> DensityField:
    return DensityField(grid, f(grid.nodes))


def field_from_coefficients(grid: PeriodicGrid, coeffs: np.ndarray) -> DensityField:
    return DensityField(grid, grid.synthesis(np.asarray(coeffs, dtype=complex)))


def _resolve_symbol(grid: PeriodicGrid, symbol) -> np.ndarray:
    """Evaluate a wavenumber -> complex map on the half spectrum, checking
    the conjugate symmetry symbol(-k) = conj(symbol(k)) required for real output."""
    if callable(symbol):
        sym = np.array([symbol(int(k)) for k in grid.k_half], dtype=complex)
        neg = np.array([symbol(-int(k)) for k in grid.k_half[1:-1]], dtype=complex)
        scale = max(np.max(np.abs(sym)), 1.0)
        if np.max(np.abs(neg - np.conj(sym[1:-1]))) > 1e-12 * scale:
            raise ValueError("symbol violates conjugate symmetry; output would not be real")
    else:
        sym = np.asarray(symbol, dtype=complex)
        if sym.shape != grid.k_half.shape:
            raise ValueError("symbol array must cover wavenumbers 0 .. n/2")
    return sym


def apply_multiplier(f: DensityField, symbol) -> DensityField:
    """Apply a Fourier multiplier.  `symbol` maps integer k to a complex scalar
    (or is a ready half-spectrum array).  The Nyquist coefficient is forced real."""
    sym = _resolve_symbol(f.grid, symbol).copy()
    sym[-1] = sym[-1].real
    out = f.grid.synthesis(sym * f.coefficients)
    return DensityField(f.grid, out)


def derivative_symbol(grid: PeriodicGrid) -> np.ndarray:
    sym = 2j * np.pi * grid.k_half.astype(complex)
    sym[-1] = 0.0  # odd symbol: Nyquist forced real
    return sym


def spectral_derivative(f: DensityField) -> DensityField:
    return apply_multiplier(f, derivative_symbol(f.grid))


def evaluate_trig(f: DensityField, xs, _block: int = 2048) -> np.ndarray:
    """Evaluate the trigonometric interpolant of f at arbitrary points.

    Exact at the nodes and for any resolved trig polynomial; the Nyquist mode
    is represented by its real cosine branch.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    c = f.coefficients
    n = f.grid.n
    k_mid = f.grid.k_half[1:-1]
    out = np.empty(len(xs))
    for lo in range(0, len(xs), _block):
        xb = xs[lo:lo + _block]
        phases = np.exp(2j * np.pi * np.outer(xb, k_mid))
        out[lo:lo + _block] = (
            c[0].real
            + 2.0 * (phases @ c[1:-1]).real
            + c[-1].real * np.cos(np.pi * n * xb)
        )
    return out


def trig_interpolate(f: DensityField, x: float) -> float:
    """Interpolant value at one point (wrapped into the torus)."""
    return float(evaluate_trig(f, [x])[0])


def antiderivative_at(f: DensityField, xs) -> np.ndarray:
    """Antiderivative F(x) = mean * x + (periodic part), with F(0) = 0.

    Spectrally exact for resolved fields; usable for mass integrals
    int_a^b f = F(b) - F(a) on unwrapped coordinates.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    c = f.coefficients
    n = f.grid.n
    k_mid = f.grid.k_half[1:-1]
    a_mid = c[1:-1] / (2j * np.pi * k_mid)
    phases = np.exp(2j * np.pi * np.outer(xs, k_mid)) - 1.0
    out = c[0].real * xs + 2.0 * (phases @ a_mid).real
    out += c[-1].real * np.sin(np.pi * n * xs) / (np.pi * n)
    return out


def parseval_mismatch(f: DensityField) -> float:
    """Relative gap between physical and spectral energy (identically small)."""
    c = f.coefficients
    w = np.where((f.grid.k_half > 0) & (f.grid.k_half < f.grid.n // 2), 2.0, 1.0)
    spec = float(np.sum(w * np.abs(c) ** 2))
    phys = float(np.sum(f.values ** 2) * f.grid.dx)
    return abs(spec - phys) / max(phys, 1e-300)
