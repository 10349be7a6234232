"""Exact closed-system annealing of small registers.

Basis state ``|b>`` is the configuration whose bit string (qubit 0 first)
reads ``b`` in binary, matching :func:`pspin_embed.model.all_configs`.
The annealing Hamiltonian is ``H(s) = A(s) H0 + B(s) H1`` with ``s = t/tf``
and, by default, ``A(s) = 1 - s`` and ``B(s) = s``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .model import IsingModel, PSpinModel, QuadraticModel, quad_to_ising

MAX_DENSE_SIZE = 12
DEGENERACY_TOL = 1e-8


class NumericalError(RuntimeError):
    """Integration or diagonalization did not meet its accuracy contract."""


class SizeLimitError(ValueError):
    pass


def _check_size(size):
    if not 1 <= size <= MAX_DENSE_SIZE:
        raise SizeLimitError(f"dense matrices limited to 1..{MAX_DENSE_SIZE} qubits, got {size}")


def pauli_z(i, size):
    """Diagonal of ``sigma^z`` acting on qubit ``i`` (qubit 0 = most significant bit)."""
    _check_size(size)
    z = np.array([1.0, -1.0])
    out = np.ones(1)
    for k in range(size):
        out = np.kron(out, z if k == i else np.ones(2))
    return out


def pauli_x(i, size):
    _check_size(size)
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = np.eye(1)
    for k in range(size):
        out = np.kron(out, x if k == i else np.eye(2))
    return out


def build_pspin_hamiltonian(model):
    """``-n (sum_i sigma^z_i / n)^p`` as a dense diagonal matrix."""
    _check_size(model.n)
    mz = sum(pauli_z(i, model.n) for i in range(model.n)) / model.n
    return np.diag(-model.n * mz**model.p)


def build_quadratic_hamiltonian(model):
    """``K + sum h_i Z_i + sum J_ij Z_i Z_j``; binary models are converted first."""
    if isinstance(model, QuadraticModel):
        model = quad_to_ising(model)
    if not isinstance(model, IsingModel):
        raise TypeError(f"expected IsingModel or QuadraticModel, got {type(model).__name__}")
    n = model.ntot
    _check_size(n)
    z = [pauli_z(i, n) for i in range(n)]
    diag = np.full(2**n, model.K)
    for i in range(n):
        diag += model.h[i] * z[i]
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            diag += model.J[k] * z[i] * z[j]
            k += 1
    return np.diag(diag)


def build_transverse_field(size):
    """``H0 = -sum_i sigma^x_i``."""
    _check_size(size)
    dim = 2**size
    h = np.zeros((dim, dim))
    idx = np.arange(dim)
    for i in range(size):
        h[idx, idx ^ (1 << (size - 1 - i))] -= 1.0
    return h


def problem_hamiltonian(model):
    if isinstance(model, PSpinModel):
        return build_pspin_hamiltonian(model)
    return build_quadratic_hamiltonian(model)


def _eigh(h):
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc


def _check_pair(h0, h1):
    if h0.shape != h1.shape or h0.ndim != 2 or h0.shape[0] != h0.shape[1]:
        raise ValueError(f"Hamiltonians must be square and of equal shape, got {h0.shape} and {h1.shape}")


def instantaneous_spectrum(h0, h1, s_grid, k):
    """Lowest ``k`` eigenvalues of ``(1-s) h0 + s h1`` at each ``s``, shape ``(len(s), k)``."""
    _check_pair(h0, h1)
    if not 1 <= k <= h0.shape[0]:
        raise ValueError(f"k must be in 1..{h0.shape[0]}")
    out = np.empty((len(s_grid), k))
    for n, s in enumerate(s_grid):
        try:
            out[n] = np.linalg.eigvalsh((1 - s) * h0 + s * h1)[:k]
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed at s={s}: {exc}") from exc
    return out


@dataclass(frozen=True)
class AdiabaticDiagnostics:
    bound: float
    max_element: float
    min_gap: float
    s_at_min_gap: float
    gap_degenerate: bool


def adiabatic_diagnostics(h0, h1, s_grid, gap_tol=1e-9):
    """Grid estimate of ``max |<a|dH/ds|b>| / gap^2`` for the linear schedule.

    The numerator maximizes over every off-diagonal eigenpair and grid point;
    the gap is the smallest ``E1 - E0`` on the grid. A gap below ``gap_tol``
    sets ``gap_degenerate`` and makes the bound infinite.
    """
    _check_pair(h0, h1)
    dh = h1 - h0
    max_el, gaps = 0.0, []
    for s in s_grid:
        w, v = _eigh((1 - s) * h0 + s * h1)
        m = np.abs(v.T @ dh @ v)
        np.fill_diagonal(m, 0.0)
        max_el = max(max_el, float(m.max()))
        gaps.append(w[1] - w[0])
    i = int(np.argmin(gaps))
    gap = float(gaps[i])
    degenerate = gap < gap_tol
    bound = float("inf") if degenerate else max_el / gap**2
    return AdiabaticDiagnostics(bound, max_el, gap, float(s_grid[i]), degenerate)


def adiabatic_bound(h0, h1, s_grid):
    return adiabatic_diagnostics(h0, h1, s_grid).bound


def linear_a(s):
    return 1.0 - s


def linear_b(s):
    return s


@dataclass(frozen=True)
class AnnealConfig:
    tf: float = 100.0
    n_grid: int = 201
    tol: float = 1e-8  # per-step error bound on the state, Euclidean norm
    method: str = "DOP853"
    k: int | None = None  # levels recorded per grid point; None -> min(dim, 16)
    schedule: tuple = field(default=(linear_a, linear_b), repr=False)

    def __post_init__(self):
        if self.tf <= 0:
            raise ValueError("tf must be > 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.n_grid < 2:
            raise ValueError("n_grid must be >= 2")

    @property
    def s_grid(self):
        return np.linspace(0.0, 1.0, self.n_grid)


@dataclass(frozen=True, eq=False)
class AnnealResult:
    s: np.ndarray
    pgs: np.ndarray  # ground-subspace occupation at each s
    spectra: np.ndarray  # (len(s), k) lowest instantaneous eigenvalues
    min_gap: float
    norm_drift: float
    n_rhs_evals: int

    @property
    def fidelity(self):
        return float(self.pgs[-1])


def evolve(h0, h1, cfg=AnnealConfig()):
    """Integrate ``i dpsi/dt = H(t/tf) psi`` from the ground state of ``h0``.

    The ground state of ``h0`` must be nondegenerate. Occupation is summed
    over the instantaneous ground subspace (levels within ``DEGENERACY_TOL``
    of the lowest).
    """
    _check_pair(h0, h1)
    a_fn, b_fn = cfg.schedule
    dim = h0.shape[0]
    k = min(dim, 16) if cfg.k is None else cfg.k

    w0, v0 = _eigh(a_fn(0.0) * h0 + b_fn(0.0) * h1)
    if dim > 1 and w0[1] - w0[0] < DEGENERACY_TOL:
        raise ValueError("initial Hamiltonian has a degenerate ground state")
    psi0 = v0[:, 0].astype(np.complex128)
    # fix the global phase so the uniform superposition starts real and positive
    psi0 *= np.exp(-1j * np.angle(psi0[np.argmax(np.abs(psi0))]))

    def rhs(t, y):
        s = t / cfg.tf
        return -1j * (a_fn(s) * (h0 @ y) + b_fn(s) * (h1 @ y))

    s = cfg.s_grid
    # solve_ivp bounds the RMS of per-component errors; scale so the 2-norm stays below tol
    step_tol = cfg.tol / np.sqrt(dim)
    sol = solve_ivp(rhs, (0.0, cfg.tf), psi0, method=cfg.method, t_eval=s * cfg.tf, rtol=step_tol, atol=step_tol)
    if not sol.success:
        raise NumericalError(f"integration failed: {sol.message}")

    pgs = np.empty(s.size)
    spectra = np.empty((s.size, k))
    gaps = np.empty(s.size)
    for n, sv in enumerate(s):
        w, v = _eigh(a_fn(sv) * h0 + b_fn(sv) * h1)
        ground = w - w[0] <= DEGENERACY_TOL
        pgs[n] = float(np.sum(np.abs(v[:, ground].conj().T @ sol.y[:, n]) ** 2))
        spectra[n] = w[:k]
        gaps[n] = w[1] - w[0] if dim > 1 else np.inf

    drift = float(np.max(np.abs(np.linalg.norm(sol.y, axis=0) - 1.0)))
    if drift > 10 * cfg.tol:
        raise NumericalError(f"norm drift {drift:.2e} exceeds 10x the integrator tolerance")
    return AnnealResult(s, np.clip(pgs, 0.0, 1.0), spectra, float(gaps.min()), drift, int(sol.nfev))
