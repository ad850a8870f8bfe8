"""
Closed-form ground-state factorization of the uniform n-level model.

A uniform product state prod_p (sum_i f_i c+_pi)|0> is an exact eigenstate
when the squared amplitudes solve the pair equation M f^2 = E2 f^2 with

    M_ij = (2 eps_i - U_ii) delta_ij - V_ij

and the remaining couplings satisfy U_ij + W_ij = eps_i + eps_j - E2. The
total energy is E2/2 * sum_p r_p, independent of range and size.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from nlevel_factor.errors import ConfigError, FactorizationError, InvariantError
from nlevel_factor.hamiltonian import HamiltonianMatrix, apply
from nlevel_factor.model import CouplingGraph, ModelSpec, all_configs, validate_coupling_matrix

logger = logging.getLogger(__name__)

CONTINUOUS_SET_GAP = 1e-9
EIGEN_RESIDUAL_TOLERANCE = 1e-10
NORM_TOLERANCE = 1e-12
STATE_NORM_TOLERANCE = 1e-10
ZERO_AMPLITUDE = 1e-12


@dataclass(frozen=True, eq=False)
class FactorizationSolution:
    """Solution of the uniform pair equation."""

    E2: float
    f_squared: NDArray[np.float64]
    f: NDArray[np.complex128]
    T_required: NDArray[np.float64]
    is_gs: bool
    sufficiency: bool
    degeneracy: int
    total_energy: float
    continuous_set: bool
    M: NDArray[np.float64]
    epsilon: NDArray[np.float64]
    n_sites: int
    r_total: float
    warnings: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return int(self.f_squared.size)

    @property
    def rank(self) -> int:
        """Number of levels with nonzero amplitude."""
        return int(np.count_nonzero(np.abs(self.f_squared) > ZERO_AMPLITUDE))

    def f_real(self) -> NDArray[np.float64] | None:
        """f as a real vector when no f^2 is negative, else None."""
        if np.any(self.f_squared < 0):
            return None
        return np.real(self.f).copy()

    def to_dict(self) -> dict[str, Any]:
        return {
            "E2": self.E2,
            "f_squared": self.f_squared.tolist(),
            "f": [{"re": float(z.real), "im": float(z.imag)} for z in self.f],
            "T_required": self.T_required.tolist(),
            "is_gs": self.is_gs,
            "sufficiency": self.sufficiency,
            "degeneracy": self.degeneracy,
            "total_energy": self.total_energy,
            "continuous_set": self.continuous_set,
            "N": self.n_sites,
            "r_total": self.r_total,
            "warnings": list(self.warnings),
        }


def _vector(name: str, values: ArrayLike, n: int | None = None) -> NDArray[np.float64]:
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 1 or (n is not None and array.size != n):
        expected = f"length {n}" if n is not None else "a vector"
        raise ConfigError(f"{name} must be {expected}, got shape {array.shape}")
    return array


def build_M(epsilon: ArrayLike, U_diag: ArrayLike, V: ArrayLike) -> NDArray[np.float64]:
    """M_ij = (2 eps_i - U_ii) delta_ij - V_ij.

    Raises:
        ConfigError: On inconsistent dimensions or an invalid V.
    """
    eps = _vector("epsilon", epsilon)
    n = eps.size
    u_diag = _vector("U_diag", U_diag, n)
    v = np.asarray(V, dtype=np.float64)
    validate_coupling_matrix("V", v, n, zero_diagonal=True)
    return np.diag(2.0 * eps - u_diag) - v


def check_gs_conditions(W: ArrayLike, U: ArrayLike) -> tuple[bool, bool]:
    """(W_ij >= 0 for all i != j, U_ij <= (U_ii + U_jj)/2 for all i != j)."""
    w = np.asarray(W, dtype=np.float64)
    u = np.asarray(U, dtype=np.float64)
    off = ~np.eye(w.shape[0], dtype=bool)
    is_gs = bool(np.all(w[off] >= 0))
    u_diag = np.diag(u)
    bound = 0.5 * (u_diag[:, None] + u_diag[None, :])
    sufficiency = bool(np.all(u[off] <= bound[off]))
    return is_gs, sufficiency


def degeneracy_count(n: int, n_sites: int, v_zero: bool) -> int:
    """Ground-state degeneracy at a factorization point.

    With V = 0 every symmetric state is degenerate: C(N+n-1, n-1). Otherwise
    the parity-projected states give 2**(n-1) when N >= n-1, and
    sum_{k<=N} C(n-1, k) for smaller systems.
    """
    if n < 2 or n_sites < 1:
        raise ConfigError(f"degeneracy needs n >= 2 and N >= 1, got n={n}, N={n_sites}")
    if v_zero:
        return math.comb(n_sites + n - 1, n - 1)
    if n_sites >= n - 1:
        return 2 ** (n - 1)
    return sum(math.comb(n - 1, k) for k in range(n_sites + 1))


def amplitudes_from_squares(f_squared: NDArray[np.float64]) -> NDArray[np.complex128]:
    """Principal square roots, scaled so sum_i |f_i|^2 = 1.

    Negative f_i^2 give purely imaginary f_i.
    """
    scale = float(np.sum(np.abs(f_squared)))
    roots = np.where(
        f_squared >= 0,
        np.sqrt(np.abs(f_squared)) + 0j,
        1j * np.sqrt(np.abs(f_squared)),
    )
    return (roots / math.sqrt(scale)).astype(np.complex128)


def solve_uniform(
    epsilon: ArrayLike,
    U_diag: ArrayLike,
    V: ArrayLike,
    *,
    n_sites: int,
    r_total: float,
    U_offdiag: ArrayLike | None = None,
) -> FactorizationSolution:
    """Solve M f^2 = E2 f^2 for the lowest E2.

    `r_total` is sum_p r_p of the lattice, so total_energy = E2 * r_total / 2;
    a single pair has n_sites=2, r_total=2. The default split puts the whole
    constraint into W (U_ij = 0 off the diagonal); pass `U_offdiag` to check
    the flags for another split.

    Raises:
        ConfigError: For N < 2 or a non-positive r_total.
        FactorizationError: If the lowest eigenvector sums to zero.
    """
    if n_sites < 2 or not r_total > 0:
        raise ConfigError(f"solve_uniform needs N >= 2 and r_total > 0, got N={n_sites}, r_total={r_total}")
    eps = _vector("epsilon", epsilon)
    n = eps.size
    M = build_M(eps, U_diag, V)
    values, vectors = scipy.linalg.eigh(M)
    E2 = float(values[0])
    scale = max(1.0, abs(E2))
    continuous_set = n > 1 and float(values[1] - values[0]) < CONTINUOUS_SET_GAP * scale

    x = vectors[:, 0]
    total = float(x.sum())
    if abs(total) < NORM_TOLERANCE * float(np.abs(x).sum()):
        raise FactorizationError(
            f"lowest eigenvector of M sums to zero (E2={E2:.12g}); f^2 cannot be normalized to unit sum"
        )
    f_squared = x / total
    residual = float(np.max(np.abs(M @ f_squared - E2 * f_squared)))
    if residual > EIGEN_RESIDUAL_TOLERANCE * scale:
        raise InvariantError(f"M f^2 - E2 f^2 residual {residual:.3e} exceeds tolerance")

    T_required = eps[:, None] + eps[None, :] - E2
    np.fill_diagonal(T_required, 0.0)

    u_diag = _vector("U_diag", U_diag, n)
    U = np.zeros((n, n)) if U_offdiag is None else np.array(U_offdiag, dtype=np.float64)
    np.fill_diagonal(U, u_diag)
    W = T_required - U
    np.fill_diagonal(W, 0.0)
    is_gs, sufficiency = check_gs_conditions(W, U)

    warnings: list[str] = []
    v_zero = not np.any(np.asarray(V))
    rank = int(np.count_nonzero(np.abs(f_squared) > ZERO_AMPLITUDE))
    if continuous_set:
        multiplicity = int(np.count_nonzero(values - values[0] < CONTINUOUS_SET_GAP * scale))
        degeneracy = degeneracy_count(multiplicity, n_sites, True) if multiplicity > 1 else 1
        warnings.append(
            f"lowest eigenvalue of M is {multiplicity}-fold degenerate: a continuous set of product states"
        )
        if not v_zero:
            warnings.append("degeneracy for a degenerate M with V != 0 is the symmetric-state count")
    elif rank > 1:
        degeneracy = degeneracy_count(rank, n_sites, False)
    else:
        degeneracy = 1
    if np.any(f_squared < 0):
        warnings.append("some f_i^2 are negative: the product state has imaginary amplitudes")

    r_sum = float(r_total)
    solution = FactorizationSolution(
        E2=E2,
        f_squared=f_squared,
        f=amplitudes_from_squares(f_squared),
        T_required=T_required,
        is_gs=is_gs,
        sufficiency=sufficiency,
        degeneracy=degeneracy,
        total_energy=0.5 * E2 * r_sum,
        continuous_set=continuous_set,
        M=M,
        epsilon=eps,
        n_sites=n_sites,
        r_total=r_sum,
        warnings=warnings,
    )
    logger.debug("solved uniform factorization: E2=%.12g f2=%s", E2, f_squared)
    return solution


def factorizing_spec(
    solution: FactorizationSolution,
    U_diag: ArrayLike,
    V: ArrayLike,
    graph: CouplingGraph,
    *,
    U_offdiag: ArrayLike | None = None,
    edge_scaling: bool = True,
) -> ModelSpec:
    """ModelSpec realizing a solution: W = T_required - U (U_ij = 0 by default)."""
    n = solution.n
    U = np.zeros((n, n)) if U_offdiag is None else np.array(U_offdiag, dtype=np.float64)
    np.fill_diagonal(U, _vector("U_diag", U_diag, n))
    W = solution.T_required - U
    np.fill_diagonal(W, 0.0)
    return ModelSpec(
        n=n,
        n_sites=graph.n_sites,
        epsilon=solution.epsilon,
        U=U,
        V=np.asarray(V, dtype=np.float64),
        W=W,
        graph=graph,
        edge_scaling=edge_scaling,
    )


def solve_onsite_energies_n3(T: ArrayLike, E2: float) -> NDArray[np.float64]:
    """eps_i = (T_ij + T_ik - T_jk + E2)/2 for n = 3.

    Only the single-site energies are returned; a constant diagonal U_0 that
    restores the original E2 is the caller's bookkeeping.

    Raises:
        ConfigError: If T is not 3x3.
    """
    t = np.asarray(T, dtype=np.float64)
    if t.shape != (3, 3):
        raise ConfigError(f"T must be 3x3, got shape {t.shape}")
    eps = np.empty(3)
    for i in range(3):
        j, k = (x for x in range(3) if x != i)
        eps[i] = 0.5 * (t[i, j] + t[i, k] - t[j, k] + E2)
    return eps


def factorization_v0(
    epsilon: ArrayLike, E2: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Couplings making every uniform product state an eigenstate when V = 0.

    Returns (U_diag, T_required) with U_ii = 2 eps_i - E2 and
    T_ij = eps_i + eps_j - E2 = (U_ii + U_jj)/2.
    """
    eps = _vector("epsilon", epsilon)
    u_diag = 2.0 * eps - E2
    T_required = eps[:, None] + eps[None, :] - E2
    np.fill_diagonal(T_required, 0.0)
    return u_diag, T_required


def xyz_factorizing_field(Jx: float, Jy: float, Jz: float) -> tuple[float, float]:
    """Factorizing field |b| and orientation cos(theta) of the XYZ chain.

    Raises:
        FactorizationError: Unless Jz <= Jy <= Jx with Jz < Jx.
    """
    if not (Jz <= Jy <= Jx) or Jz == Jx:
        raise FactorizationError(
            f"factorizing field needs Jz < Jy <= Jx, got Jx={Jx}, Jy={Jy}, Jz={Jz}"
        )
    b = math.sqrt((Jy - Jz) * (Jx - Jz))
    cos_theta = math.sqrt((Jy - Jz) / (Jx - Jz))
    return b, cos_theta


def xyz_spec_params(
    Jx: float, Jy: float, Jz: float, b: float
) -> dict[str, NDArray[np.float64]]:
    """n = 2 couplings equivalent to the XYZ chain in a field b along z."""
    return {
        "epsilon": np.array([-b / 2.0, b / 2.0]),
        "U": np.array([[Jz / 2.0, -Jz / 2.0], [-Jz / 2.0, Jz / 2.0]]),
        "V": np.array([[0.0, (Jx - Jy) / 2.0], [(Jx - Jy) / 2.0, 0.0]]),
        "W": np.array([[0.0, (Jx + Jy) / 2.0], [(Jx + Jy) / 2.0, 0.0]]),
    }


def product_state(f: ArrayLike, n_sites: int) -> NDArray[np.generic]:
    """Uniform product state with amplitude prod_p f_{i_p} per configuration.

    Raises:
        ConfigError: If sum_i |f_i|^2 differs from 1 by more than 1e-12.
    """
    amplitudes = np.asarray(f)
    norm = float(np.sum(np.abs(amplitudes) ** 2))
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise ConfigError(f"f must satisfy sum |f_i|^2 = 1, got {norm:.15g}")
    if np.iscomplexobj(amplitudes) and not np.any(amplitudes.imag):
        amplitudes = amplitudes.real
    configs = all_configs(amplitudes.size, n_sites)
    state: NDArray[np.generic] = np.prod(amplitudes[configs], axis=1)
    return state


def verify_eigenstate(H: HamiltonianMatrix, psi: ArrayLike) -> tuple[float, float]:
    """Return (<psi|H|psi>, ||H psi - E psi||).

    Raises:
        ConfigError: If psi is not normalized.
    """
    state = np.asarray(psi)
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
        raise ConfigError(f"state must have unit norm, got {norm:.15g}")
    h_psi = apply(H, state)
    energy = float(np.real(np.vdot(state, h_psi)))
    residual = float(np.linalg.norm(h_psi - energy * state))
    return energy, residual


def parity_flip_family(f: ArrayLike) -> list[NDArray[np.generic]]:
    """Distinct sign patterns of f modulo a global sign.

    Level 0 keeps its sign; the other n-1 levels are flipped in every
    combination. Patterns that coincide (zero amplitudes) appear once.
    """
    base = np.asarray(f)
    n = base.size
    family: list[NDArray[np.generic]] = []
    for mask in range(2 ** (n - 1)):
        signs = np.ones(n)
        for level in range(1, n):
            if mask >> (level - 1) & 1:
                signs[level] = -1.0
        candidate = base * signs
        duplicate = any(
            np.allclose(candidate, seen, atol=ZERO_AMPLITUDE)
            or np.allclose(candidate, -seen, atol=ZERO_AMPLITUDE)
            for seen in family
        )
        if not duplicate:
            family.append(candidate)
    return family
