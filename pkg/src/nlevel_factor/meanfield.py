"""
Uniform mean-field (Hartree-Fock) solution of the n-level model.

For a uniform product state with real amplitudes the energy is the quadratic
form E(f^2) = (r/2) f^2 . Mt f^2 on the probability simplex, with

    Mt_ij = c (eps_i + eps_j) - J_ij,    J = U + V + W,

where r = sum_p r_p and c = sum_p s_p / r (s_p = r_p with edge scaling, so
c = 1 in that case). Stationary points on an active level set A satisfy
Mt_A f^2_A = lambda 1 with sum f^2 = 1, and E = (r/2) lambda.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import scipy.optimize
from numpy.typing import ArrayLike, NDArray

from nlevel_factor.config import get_seed
from nlevel_factor.errors import ConfigError, InvariantError
from nlevel_factor.model import ModelSpec

logger = logging.getLogger(__name__)

ATTRACTIVE_WARNING = "outside attractive regime"
ENERGY_IDENTITY_TOLERANCE = 1e-12
STATIONARITY_TOLERANCE = 1e-10
FEASIBILITY_TOLERANCE = 1e-12
SINGULAR_CONDITION = 1e12
MAX_FACE_SEARCH_LEVELS = 12


class MeanFieldMethod(str, Enum):
    """Which path produced a mean-field solution."""

    CLOSED_FORM = "closed_form"
    FACE_SEARCH = "face_search"
    BRUTE_FORCE = "brute_force"


@dataclass(frozen=True, eq=False)
class MeanFieldSolution:
    """Best uniform product state."""

    f_squared: NDArray[np.float64]
    occupied: tuple[int, ...]
    energy: float
    lam: float
    M_tilde: NDArray[np.float64]
    dropped: tuple[int, ...] = ()
    method: MeanFieldMethod = MeanFieldMethod.CLOSED_FORM
    warning: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "f_squared": self.f_squared.tolist(),
            "occupied": [level + 1 for level in self.occupied],
            "energy": self.energy,
            "lambda": self.lam,
            "dropped": [level + 1 for level in self.dropped],
            "method": self.method.value,
            "warning": self.warning,
        }


@dataclass(frozen=True)
class MeanFieldTransition:
    """A level entering or leaving the occupied set along a sweep."""

    param: float
    level: int
    kind: str

    def to_dict(self) -> dict[str, Any]:
        return {"param": self.param, "level": self.level + 1, "kind": self.kind}


@dataclass(frozen=True)
class _Candidate:
    f_squared: NDArray[np.float64]
    active: tuple[int, ...]
    lam: float


def mean_field_matrix(spec: ModelSpec) -> tuple[NDArray[np.float64], float]:
    """(Mt, r) for a spec."""
    r = spec.graph.r_total
    c = float(spec.site_scale().sum()) / r
    eps = spec.epsilon
    M_tilde = c * (eps[:, None] + eps[None, :]) - spec.J
    return M_tilde, r


def mf_energy(f_squared: ArrayLike, spec: ModelSpec) -> float:
    """<H> of the uniform product state with squared amplitudes f^2.

    Evaluated both as sum_p s_p sum_i eps_i f_i^2 - (r/2) sum_ij J_ij f_i^2 f_j^2
    and as (r/2) f^2 . Mt f^2; the two must agree.

    Raises:
        ConfigError: If f^2 is negative or does not sum to 1.
        InvariantError: If the two forms disagree.
    """
    f2 = np.asarray(f_squared, dtype=np.float64)
    if f2.shape != (spec.n,):
        raise ConfigError(f"f^2 must have {spec.n} entries, got shape {f2.shape}")
    if np.any(f2 < -FEASIBILITY_TOLERANCE) or abs(float(f2.sum()) - 1.0) > 1e-10:
        raise ConfigError(f"f^2 must be nonnegative and sum to 1, got {f2.tolist()}")
    M_tilde, r = mean_field_matrix(spec)
    single = float(spec.site_scale().sum()) * float(spec.epsilon @ f2)
    pair = 0.5 * r * float(f2 @ spec.J @ f2)
    direct = single - pair
    quadratic = 0.5 * r * float(f2 @ M_tilde @ f2)
    scale = max(1.0, abs(single), abs(pair))
    if abs(direct - quadratic) > ENERGY_IDENTITY_TOLERANCE * scale:
        raise InvariantError(f"mean-field energy forms disagree: {direct!r} vs {quadratic!r}")
    return direct


def _solve_face(M_tilde: NDArray[np.float64], active: tuple[int, ...]) -> _Candidate | None:
    """Stationary point of the quadratic form on one face, or None if singular."""
    m = len(active)
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = M_tilde[np.ix_(active, active)]
    kkt[:m, m] = -1.0
    kkt[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    if np.linalg.cond(kkt) > SINGULAR_CONDITION:
        return None
    try:
        solution = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return None
    f2 = np.zeros(M_tilde.shape[0])
    f2[list(active)] = solution[:m]
    return _Candidate(f_squared=f2, active=active, lam=float(solution[m]))


def _drop_and_resolve(M_tilde: NDArray[np.float64]) -> tuple[_Candidate | None, tuple[int, ...]]:
    active = tuple(range(M_tilde.shape[0]))
    dropped: list[int] = []
    while True:
        candidate = _solve_face(M_tilde, active)
        if candidate is None:
            logger.debug("singular mean-field system on levels %s", active)
            return None, tuple(dropped)
        values = candidate.f_squared[list(active)]
        worst = int(np.argmin(values))
        if values[worst] >= -FEASIBILITY_TOLERANCE:
            return candidate, tuple(dropped)
        dropped.append(active[worst])
        active = tuple(level for level in active if level != active[worst])


def _face_search(M_tilde: NDArray[np.float64]) -> list[_Candidate]:
    n = M_tilde.shape[0]
    feasible = []
    for size in range(n, 0, -1):
        for active in itertools.combinations(range(n), size):
            candidate = _solve_face(M_tilde, active)
            if candidate is not None and np.all(candidate.f_squared >= -FEASIBILITY_TOLERANCE):
                feasible.append(candidate)
    return feasible


def _pick(candidates: list[_Candidate], tolerance: float) -> _Candidate:
    best = min(c.lam for c in candidates)
    tied = [c for c in candidates if c.lam <= best + tolerance]
    return min(tied, key=lambda c: (-len(c.active), c.active))


def _clean(f2: NDArray[np.float64]) -> NDArray[np.float64]:
    cleaned = np.where(np.abs(f2) <= FEASIBILITY_TOLERANCE, 0.0, f2)
    cleaned = np.clip(cleaned, 0.0, None)
    return cleaned / cleaned.sum()


def mf_solve(spec: ModelSpec) -> MeanFieldSolution:
    """Minimize the uniform mean-field energy.

    Starts from all levels, solves the closed form, and while some f_i^2 < 0
    drops the most negative level and re-solves. The result is compared with
    every stationary point on the simplex faces (n <= 12); if the closed form
    hits a singular system or a lower face exists, the face minimum is used.
    Ties prefer more occupied levels, then the lexicographically smallest set.
    """
    M_tilde, _ = mean_field_matrix(spec)
    n = spec.n
    scale = max(1.0, float(np.max(np.abs(M_tilde))))
    tolerance = ENERGY_IDENTITY_TOLERANCE * scale

    warning = None
    if spec.has_negative_couplings():
        warning = ATTRACTIVE_WARNING
        logger.warning("mean field with negative couplings: %s", ATTRACTIVE_WARNING)

    closed, dropped = _drop_and_resolve(M_tilde)
    method = MeanFieldMethod.CLOSED_FORM
    if n <= MAX_FACE_SEARCH_LEVELS:
        candidates = _face_search(M_tilde)
    else:
        candidates = [c for c in (_solve_face(M_tilde, (k,)) for k in range(n)) if c is not None]
        if closed is None:
            oracle = brute_force_minimize(spec)
            polished = _solve_face(M_tilde, oracle.occupied)
            if polished is not None and np.all(polished.f_squared >= -FEASIBILITY_TOLERANCE):
                candidates.append(polished)
    if closed is not None:
        candidates.append(closed)
    chosen = _pick(candidates, tolerance)
    if closed is None or chosen.active != closed.active:
        method = MeanFieldMethod.FACE_SEARCH
        logger.debug("mean field fell back to face search: levels %s", chosen.active)

    f2 = _clean(chosen.f_squared)
    active = chosen.active
    residual = np.abs(M_tilde[np.ix_(active, active)] @ f2[list(active)] - chosen.lam)
    if np.any(residual > STATIONARITY_TOLERANCE * scale):
        raise InvariantError(f"mean-field stationarity residual {float(residual.max()):.3e}")
    energy = mf_energy(f2, spec)
    return MeanFieldSolution(
        f_squared=f2,
        occupied=tuple(int(level) for level in np.nonzero(f2 > 0)[0]),
        energy=energy,
        lam=chosen.lam,
        M_tilde=M_tilde,
        dropped=dropped if method is MeanFieldMethod.CLOSED_FORM else (),
        method=method,
        warning=warning,
    )


def uniform_j_solution(epsilon: ArrayLike, J: float) -> NDArray[np.float64]:
    """f_i^2 = 1/m - eps~_i / J on the lowest m levels, for U_ii = 0 and J_ij = J.

    eps~ is measured from the mean of the occupied levels; m is the largest
    subset for which every f_i^2 is nonnegative.

    Raises:
        ConfigError: If J is not positive.
    """
    eps = np.asarray(epsilon, dtype=np.float64)
    if J <= 0:
        raise ConfigError(f"uniform coupling J must be positive, got {J}")
    order = np.argsort(eps, kind="stable")
    for m in range(eps.size, 0, -1):
        subset = order[:m]
        shifted = eps[subset] - eps[subset].mean()
        values = 1.0 / m - shifted / J
        if np.all(values >= -FEASIBILITY_TOLERANCE):
            f2 = np.zeros(eps.size)
            f2[subset] = np.clip(values, 0.0, None)
            return f2 / f2.sum()
    raise InvariantError("no feasible uniform-J solution")  # pragma: no cover - m=1 always feasible


def critical_couplings(epsilon: ArrayLike) -> list[float]:
    """J_m^c = m eps~_m for m = 2..n over the lowest m levels."""
    eps = np.sort(np.asarray(epsilon, dtype=np.float64))
    return [float(m * (eps[m - 1] - eps[:m].mean())) for m in range(2, eps.size + 1)]


def mf_fluctuation(f_squared: ArrayLike, n_sites: int) -> NDArray[np.float64]:
    """<N_i^2> - <N_i>^2 = N f_i^2 (1 - f_i^2) in the product state."""
    f2 = np.asarray(f_squared, dtype=np.float64)
    return n_sites * f2 * (1.0 - f2)


def _project_simplex(x: NDArray[np.float64]) -> NDArray[np.float64]:
    u = np.sort(x)[::-1]
    cumulative = np.cumsum(u) - 1.0
    index = np.arange(1, x.size + 1)
    rho = int(np.nonzero(u - cumulative / index > 0)[0][-1])
    theta = cumulative[rho] / (rho + 1)
    return np.maximum(x - theta, 0.0)


def brute_force_minimize(
    spec: ModelSpec,
    *,
    restarts: int = 24,
    iterations: int = 4000,
    seed: int | None = None,
    polish: bool = True,
) -> MeanFieldSolution:
    """Projected-gradient minimization of the mean-field energy on the simplex.

    Starts from every vertex, the barycenter and `restarts` random points;
    each run is optionally polished with SLSQP. Used as an oracle for
    `mf_solve`.
    """
    M_tilde, r = mean_field_matrix(spec)
    n = spec.n
    rng = np.random.default_rng(get_seed(seed))
    step = 1.0 / (r * max(float(np.linalg.norm(M_tilde, 2)), 1e-12))
    starts = [np.eye(n)[k] for k in range(n)]
    starts.append(np.full(n, 1.0 / n))
    starts.extend(rng.dirichlet(np.ones(n)) for _ in range(restarts))

    def energy(x: NDArray[np.float64]) -> float:
        return 0.5 * r * float(x @ M_tilde @ x)

    def gradient(x: NDArray[np.float64]) -> NDArray[np.float64]:
        grad: NDArray[np.float64] = r * (M_tilde @ x)
        return grad

    best_x, best_e = starts[0], energy(starts[0])
    for start in starts:
        x = start.copy()
        for _ in range(iterations):
            moved = _project_simplex(x - step * gradient(x))
            if np.max(np.abs(moved - x)) < 1e-15:
                break
            x = moved
        if polish:
            result = scipy.optimize.minimize(
                energy,
                x,
                jac=gradient,
                method="SLSQP",
                bounds=[(0.0, 1.0)] * n,
                constraints=[{"type": "eq", "fun": lambda y: float(y.sum()) - 1.0}],
                options={"ftol": 1e-15, "maxiter": 500},
            )
            polished = _project_simplex(np.asarray(result.x, dtype=np.float64))
            if energy(polished) < energy(x):
                x = polished
        e = energy(x)
        if e < best_e:
            best_x, best_e = x, e
    f2 = _clean(best_x)
    return MeanFieldSolution(
        f_squared=f2,
        occupied=tuple(int(level) for level in np.nonzero(f2 > 0)[0]),
        energy=energy(f2),
        lam=2.0 * energy(f2) / r,
        M_tilde=M_tilde,
        method=MeanFieldMethod.BRUTE_FORCE,
    )


def mf_transition_points(
    family: Callable[[float], ModelSpec],
    start: float,
    stop: float,
    *,
    steps: int = 201,
    resolution: float = 1e-6,
) -> list[MeanFieldTransition]:
    """Parameters where the occupied level set of the mean field changes.

    The sweep is scanned on a grid, then every change is refined by bisection
    to `resolution` (relative to max(1, |param|)).

    Raises:
        ConfigError: For an empty range or fewer than 2 steps.
    """
    if not stop > start:
        raise ConfigError(f"mean-field sweep needs start < stop, got [{start}, {stop}]")
    if steps < 2:
        raise ConfigError(f"mean-field sweep needs at least 2 steps, got {steps}")

    def occupied_at(x: float) -> frozenset[int]:
        return frozenset(mf_solve(family(x)).occupied)

    grid = np.linspace(start, stop, steps)
    sets = [occupied_at(float(x)) for x in grid]
    transitions: list[MeanFieldTransition] = []
    for k in range(steps - 1):
        if sets[k] == sets[k + 1]:
            continue
        lo, hi = float(grid[k]), float(grid[k + 1])
        left, right = sets[k], sets[k + 1]
        while hi - lo > resolution * max(1.0, abs(hi)):
            mid = 0.5 * (lo + hi)
            if occupied_at(mid) == left:
                lo = mid
            else:
                hi = mid
        point = 0.5 * (lo + hi)
        logger.debug("mean-field occupation change at %.9f: %s -> %s", point, sorted(left), sorted(right))
        transitions.extend(MeanFieldTransition(point, level, "onset") for level in sorted(right - left))
        transitions.extend(MeanFieldTransition(point, level, "depletion") for level in sorted(left - right))
    return transitions


@dataclass
class MeanFieldSweep:
    """Mean-field solutions along a parameter grid."""

    grid: NDArray[np.float64]
    solutions: list[MeanFieldSolution] = field(default_factory=list)

    def rows(self) -> list[list[float]]:
        return [
            [float(x), *sol.f_squared.tolist(), sol.energy]
            for x, sol in zip(self.grid, self.solutions)
        ]


def mf_sweep(family: Callable[[float], ModelSpec], grid: ArrayLike) -> MeanFieldSweep:
    """Solve the mean field at every grid point."""
    points = np.asarray(grid, dtype=np.float64)
    return MeanFieldSweep(grid=points, solutions=[mf_solve(family(float(x))) for x in points])
