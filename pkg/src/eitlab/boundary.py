"""Band-limited function calculus on the boundary circle.

Functions on the boundary are stored by their Fourier coefficients in
arclength parametrization, ``c_n = (1/N) sum_k f(l_k) exp(-2 pi i n k / N)``
on ``N`` equispaced nodes ``l_k = k L / N``.  Operators are dense real
``N x N`` matrices acting on nodal sample values; this is equivalent to the
stacked (Re, Im)-coefficient representation for real-linear operators and
keeps composition and application to complex traces trivial.

Orientation convention: the positive tangent direction is the one for which
the disk identity ``J Lambda cos(n theta) = sin(n theta)`` holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import dft

from .errors import DimensionMismatch, NonZeroMean

__all__ = [
    "BoundaryFunction",
    "BoundaryOperator",
    "from_samples",
    "derivative_gamma",
    "integrate_J",
    "mean",
    "sobolev_norm",
    "ck_norm",
    "operator_norm",
    "identity_operator",
    "zero_operator",
    "operator_from_symbol",
    "trig_interp_matrix",
]

_REALITY_TOL = 1e-13


def mode_numbers(n: int) -> np.ndarray:
    """Integer mode numbers in FFT ordering (Nyquist counted as -N/2)."""
    return np.fft.fftfreq(n, d=1.0 / n)


@dataclass(frozen=True)
class BoundaryFunction:
    """Band-limited complex function on the boundary circle."""

    coeffs: np.ndarray
    length: float
    is_real: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        n = c.size
        if n < 8 or n % 2 != 0:
            raise ValueError(f"need even N >= 8, got N={n}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        if self.length <= 0:
            raise ValueError("length must be positive")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    def values(self, n_points: int | None = None) -> np.ndarray:
        """Sample values on n_points equispaced nodes (default: native grid)."""
        n = self.n_modes
        if n_points is None or n_points == n:
            v = np.fft.ifft(self.coeffs) * n
        else:
            if n_points < n:
                raise ValueError("downsampling not supported")
            c = _embed_spectrum(self.coeffs, n_points)
            v = np.fft.ifft(c) * n_points
        if self.is_real:
            return v.real
        return v

    def nodes(self, n_points: int | None = None) -> np.ndarray:
        m = n_points or self.n_modes
        return np.arange(m) * (self.length / m)

    def eval_at(self, l: np.ndarray) -> np.ndarray:
        """Evaluate the trigonometric interpolant at arbitrary arclength points."""
        l = np.atleast_1d(np.asarray(l, dtype=float))
        n = self.n_modes
        modes = mode_numbers(n).copy()
        c = self.coeffs.copy()
        # Nyquist as cosine: split between +N/2 and -N/2.
        ny = n // 2
        c_ny = c[ny]
        phase = np.exp(2j * np.pi * np.outer(l, modes) / self.length)
        out = phase @ c
        out += 0.5 * c_ny * (
            np.exp(2j * np.pi * l * (ny) / self.length)
            - np.exp(-2j * np.pi * l * ny / self.length)
        )
        if self.is_real:
            out = out.real
        return out

    def conj(self) -> "BoundaryFunction":
        return from_samples(np.conj(self.values()), self.length)

    @property
    def real(self) -> "BoundaryFunction":
        return from_samples(self.values().real, self.length)

    @property
    def imag(self) -> "BoundaryFunction":
        v = self.values()
        return from_samples(np.asarray(v).imag if np.iscomplexobj(v) else np.zeros_like(v), self.length)

    def __add__(self, other):
        if isinstance(other, BoundaryFunction):
            _check_compatible_f(self, other)
            return from_samples(self.values() + other.values(), self.length)
        return from_samples(self.values() + other, self.length)

    def __sub__(self, other):
        if isinstance(other, BoundaryFunction):
            _check_compatible_f(self, other)
            return from_samples(self.values() - other.values(), self.length)
        return from_samples(self.values() - other, self.length)

    def __mul__(self, scalar):
        return from_samples(self.values() * scalar, self.length)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {
            "n_modes": int(self.n_modes),
            "length": float(self.length),
            "coeffs_re": self.coeffs.real.tolist(),
            "coeffs_im": self.coeffs.imag.tolist(),
        }

    @staticmethod
    def from_json(d: dict) -> "BoundaryFunction":
        c = np.asarray(d["coeffs_re"], dtype=float) + 1j * np.asarray(d["coeffs_im"], dtype=float)
        f = BoundaryFunction(c, float(d["length"]))
        return _tag_reality(f)


def _embed_spectrum(c: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad an FFT-ordered spectrum to m entries, splitting the Nyquist."""
    n = c.size
    out = np.zeros(m, dtype=complex)
    half = n // 2
    out[:half] = c[:half]
    out[m - half + 1:] = c[half + 1:]
    out[half] = 0.5 * c[half]
    out[m - half] += 0.5 * c[half]
    return out


def _tag_reality(f: BoundaryFunction) -> BoundaryFunction:
    v = f.values()
    scale = np.max(np.abs(v)) or 1.0
    if np.max(np.abs(np.imag(v))) <= _REALITY_TOL * scale:
        return BoundaryFunction(f.coeffs, f.length, is_real=True)
    return f


def _check_compatible_f(a: BoundaryFunction, b: BoundaryFunction):
    if a.n_modes != b.n_modes or not np.isclose(a.length, b.length):
        raise DimensionMismatch(
            f"functions on different grids: (N={a.n_modes}, L={a.length}) vs (N={b.n_modes}, L={b.length})"
        )


def from_samples(values: np.ndarray, length: float) -> BoundaryFunction:
    """Build a BoundaryFunction from values at N equispaced arclength nodes."""
    v = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite sample values")
    n = v.size
    if n < 8 or n % 2 != 0:
        raise ValueError(f"need even N >= 8, got N={n}")
    c = np.fft.fft(v) / n
    f = BoundaryFunction(c, length)
    return _tag_reality(f)


def from_modes(n_modes: int, length: float, mode_dict: dict[int, complex]) -> BoundaryFunction:
    """Convenience constructor from {mode: coefficient}."""
    c = np.zeros(n_modes, dtype=complex)
    for m, a in mode_dict.items():
        c[m % n_modes] = a
    return _tag_reality(BoundaryFunction(c, length))


def _omega(n: int, length: float) -> np.ndarray:
    """Angular wavenumbers 2 pi n / L in FFT ordering."""
    return 2.0 * np.pi * mode_numbers(n) / length


def derivative_gamma(f: BoundaryFunction) -> BoundaryFunction:
    """Tangential derivative; the (sign-ambiguous) Nyquist mode is dropped."""
    n = f.n_modes
    sym = 1j * _omega(n, f.length)
    sym[n // 2] = 0.0
    c = f.coeffs * sym
    out = BoundaryFunction(c, f.length)
    if f.is_real:
        out = _tag_reality(out)
    return out


def integrate_J(f: BoundaryFunction, rel_tol: float = 1e-10) -> BoundaryFunction:
    """Antiderivative on the zero-mean subspace, normalized to zero mean."""
    norm = np.sqrt(np.sum(np.abs(f.coeffs) ** 2) * f.length) or 1.0
    if abs(f.coeffs[0]) * f.length > rel_tol * norm:
        raise NonZeroMean(f"mean {f.coeffs[0] * f.length:.3e} exceeds {rel_tol:.1e} * ||f||")
    n = f.n_modes
    omega = _omega(n, f.length)
    omega[n // 2] = 2.0 * np.pi * (n // 2) / f.length
    c = np.zeros_like(f.coeffs)
    c[1:] = f.coeffs[1:] / (1j * omega[1:])
    out = BoundaryFunction(c, f.length)
    if f.is_real:
        out = _tag_reality(out)
    return out


def mean(f: BoundaryFunction) -> complex:
    """Integral of f over the boundary (length-weighted mean convention)."""
    m = f.length * f.coeffs[0]
    return m.real if f.is_real else m


def sobolev_weights(n: int, length: float, s: float) -> np.ndarray:
    return (1.0 + _omega(n, length) ** 2) ** (s / 2.0)


def sobolev_norm(f: BoundaryFunction, s: float) -> float:
    w = sobolev_weights(f.n_modes, f.length, s)
    return float(np.sqrt(np.sum((w * np.abs(f.coeffs)) ** 2) * f.length))


def ck_norm(f: BoundaryFunction, k: int) -> float:
    """Discrete sup norm of f and its first k tangential derivatives."""
    if k not in (0, 1, 2):
        raise ValueError("k must be in {0, 1, 2}")
    g = f
    best = 0.0
    for _ in range(k + 1):
        best = max(best, float(np.max(np.abs(g.values(4 * f.n_modes)))))
        g = derivative_gamma(g)
    return best


@dataclass(frozen=True)
class BoundaryOperator:
    """Real-linear operator on boundary functions: dense real nodal matrix."""

    matrix: np.ndarray
    length: float
    kind_tag: str = "generic"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]

    def apply(self, f: BoundaryFunction) -> BoundaryFunction:
        _check_compatible_of(self, f)
        return from_samples(self.matrix @ f.values(), self.length)

    __call__ = apply

    def compose(self, other: "BoundaryOperator") -> "BoundaryOperator":
        _check_compatible_oo(self, other)
        return BoundaryOperator(self.matrix @ other.matrix, self.length,
                                f"{self.kind_tag}*{other.kind_tag}")

    __matmul__ = compose

    def __add__(self, other: "BoundaryOperator") -> "BoundaryOperator":
        _check_compatible_oo(self, other)
        return BoundaryOperator(self.matrix + other.matrix, self.length, "sum")

    def __sub__(self, other: "BoundaryOperator") -> "BoundaryOperator":
        _check_compatible_oo(self, other)
        return BoundaryOperator(self.matrix - other.matrix, self.length, "diff")

    def scale(self, a: float) -> "BoundaryOperator":
        return BoundaryOperator(a * self.matrix, self.length, self.kind_tag)

    __mul__ = scale
    __rmul__ = scale

    def to_json(self) -> dict:
        return {
            "n": int(self.n_modes),
            "length": float(self.length),
            "matrix_row_major": self.matrix.reshape(-1).tolist(),
        }

    @staticmethod
    def from_json(d: dict) -> "BoundaryOperator":
        n = int(d["n"])
        m = np.asarray(d["matrix_row_major"], dtype=float).reshape(n, n)
        return BoundaryOperator(m, float(d["length"]))


def _check_compatible_of(a: BoundaryOperator, f: BoundaryFunction):
    if a.n_modes != f.n_modes or not np.isclose(a.length, f.length):
        raise DimensionMismatch("operator/function grid mismatch")


def _check_compatible_oo(a: BoundaryOperator, b: BoundaryOperator):
    if a.n_modes != b.n_modes or not np.isclose(a.length, b.length):
        raise DimensionMismatch("operator/operator grid mismatch")


def identity_operator(n: int, length: float) -> BoundaryOperator:
    return BoundaryOperator(np.eye(n), length, "identity")


def zero_operator(n: int, length: float) -> BoundaryOperator:
    return BoundaryOperator(np.zeros((n, n)), length, "zero")


def operator_from_symbol(symbol: np.ndarray, length: float, kind_tag: str = "symbol") -> BoundaryOperator:
    """Circulant operator with the given Fourier multiplier (FFT ordering).

    The symbol must satisfy sigma(-n) = conj(sigma(n)) so the nodal matrix
    is real (the operator maps real functions to real functions).
    """
    sigma = np.asarray(symbol, dtype=complex)
    n = sigma.size
    col = np.fft.ifft(sigma)  # first column of the circulant
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    mat = col[idx]
    if np.max(np.abs(mat.imag)) > 1e-12 * max(np.max(np.abs(mat.real)), 1.0):
        raise ValueError("symbol does not define a real operator")
    return BoundaryOperator(mat.real, length, kind_tag)


def mean_removal(n: int, length: float) -> BoundaryOperator:
    """Orthogonal projection onto the zero-mean subspace."""
    return BoundaryOperator(np.eye(n) - np.ones((n, n)) / n, length, "zero-mean-projection")


def derivative_operator(n: int, length: float) -> BoundaryOperator:
    sym = 1j * _omega(n, length)
    sym[n // 2] = 0.0
    return operator_from_symbol(sym, length, "derivative")


def integration_operator(n: int, length: float) -> BoundaryOperator:
    omega = _omega(n, length)
    sym = np.zeros(n, dtype=complex)
    nz = omega != 0.0
    sym[nz] = 1.0 / (1j * omega[nz])
    # Nyquist annihilated, matching the derivative operator, so the
    # circulant stays real.
    sym[n // 2] = 0.0
    return operator_from_symbol(sym, length, "integration")


def operator_norm(a: BoundaryOperator, s_from: float, s_to: float) -> float:
    """H^{s_from} -> H^{s_to} operator norm over real-valued functions.

    Computed as the largest singular value of the Sobolev-weighted matrix in
    the Fourier basis; for a real operator the complexified norm coincides
    with the real-restricted one.
    """
    n = a.n_modes
    f = dft(n)  # unnormalized DFT matrix
    w_from = sobolev_weights(n, a.length, s_from)
    w_to = sobolev_weights(n, a.length, s_to)
    b = (w_to[:, None] * (f @ a.matrix @ f.conj().T) / n) / w_from[None, :]
    return float(np.linalg.norm(b, ord=2))


def trig_interp_matrix(n: int, length: float, targets: np.ndarray) -> np.ndarray:
    """Real matrix mapping N equispaced samples to values at arbitrary points.

    Rows are the periodic-sinc (Dirichlet) cardinal functions for even N with
    the Nyquist mode treated as a cosine.
    """
    targets = np.asarray(targets, dtype=float)
    h = length / n
    x = targets[:, None] - h * np.arange(n)[None, :]
    u = np.pi * x / length
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.sin(n * u) / (n * np.tan(u))
    # x congruent to 0 mod L: cardinal limit 1 (tan vanishes there)
    on_period = np.isclose(np.remainder(x / length + 0.5, 1.0), 0.5,
                           rtol=0.0, atol=1e-13)
    k[on_period] = 1.0
    k[~np.isfinite(k)] = 0.0
    return k
