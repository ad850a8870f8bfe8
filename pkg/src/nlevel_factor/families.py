"""
Named one-parameter model families for sweeps.

A parameter path selects how the sweep value x enters the model:

    scale:V | scale:W | scale:U | scale:epsilon
        multiply one field of the base model by x
    lerp:fig2
        V_ij = x v_c, W_ij = x (eps_i + eps_j - E2c), U = 0, with E2c the pair
        energy at v = v_c, so the ground state factorizes at x = 1
    lerp:fig6
        V = 0, U_ii = x (2 eps_i - E2), W_ij = x (eps_i + eps_j - E2), E2 = -5
    lerp:fig7
        V = 0, U_ii = W_ij = 1 and the single-site energies scaled by x

n, N, the graph and the single-site energies always come from the base model.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from nlevel_factor.errors import ConfigError
from nlevel_factor.factorization import degeneracy_count, solve_uniform
from nlevel_factor.model import GraphKind, ModelSpec, num_occupation_sectors

logger = logging.getLogger(__name__)

FIG2_V_CRITICAL = 0.4
FIG6_PAIR_ENERGY = -5.0
FIG6_EPSILON = (-1.0, 0.0, 0.8, 2.2)
FIG7_COUPLING = 1.0

SCALE_FIELDS = ("V", "W", "U", "epsilon")
LERP_RECIPES = ("fig2", "fig6", "fig7")


def fig2_epsilon(n: int) -> NDArray[np.float64]:
    """Equally spaced spectrum eps_i = (i - (n+1)/2) / 2, i = 1..n."""
    return 0.5 * (np.arange(1, n + 1) - (n + 1) / 2.0)


def fig6_epsilon(n: int) -> NDArray[np.float64]:
    if not 2 <= n <= len(FIG6_EPSILON):
        raise ConfigError(f"the unequally spaced spectrum is defined for n in [2, {len(FIG6_EPSILON)}], got {n}")
    return np.array(FIG6_EPSILON[:n])


def _offdiag(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.array(matrix, dtype=np.float64)
    np.fill_diagonal(out, 0.0)
    return out


def fig2_pair_energy(epsilon: NDArray[np.float64], v_c: float = FIG2_V_CRITICAL) -> float:
    """E2c: lowest pair energy with U = 0 and V_ij = v_c off the diagonal."""
    n = epsilon.size
    return solve_uniform(epsilon, np.zeros(n), _offdiag(np.full((n, n), v_c)), n_sites=2, r_total=2.0).E2


@dataclass(frozen=True)
class ParameterFamily:
    """A model family x -> ModelSpec built around a base model."""

    path: str
    base: ModelSpec
    build: Callable[[ModelSpec, float], ModelSpec]
    band_size: int | None = None
    critical: float | None = None

    def __call__(self, x: float) -> ModelSpec:
        return self.build(self.base, float(x))

    @property
    def label(self) -> str:
        """Column name for the sweep parameter."""
        return self.path.split(":", 1)[1]


def _scale(field: str) -> Callable[[ModelSpec, float], ModelSpec]:
    def build(base: ModelSpec, x: float) -> ModelSpec:
        return base.with_changes(**{field: x * getattr(base, field)})

    return build


def _fig2(base: ModelSpec) -> Callable[[ModelSpec, float], ModelSpec]:
    eps = base.epsilon
    E2c = fig2_pair_energy(eps)
    V_c = _offdiag(np.full((base.n, base.n), FIG2_V_CRITICAL))
    W_c = _offdiag(eps[:, None] + eps[None, :] - E2c)
    logger.debug("fig2 recipe: v_c=%g, E2c=%.12g", FIG2_V_CRITICAL, E2c)

    def build(spec: ModelSpec, x: float) -> ModelSpec:
        return spec.with_changes(U=np.zeros((spec.n, spec.n)), V=x * V_c, W=x * W_c)

    return build


def _fig6(base: ModelSpec) -> Callable[[ModelSpec, float], ModelSpec]:
    eps = base.epsilon
    U_c = np.diag(2.0 * eps - FIG6_PAIR_ENERGY)
    W_c = _offdiag(eps[:, None] + eps[None, :] - FIG6_PAIR_ENERGY)

    def build(spec: ModelSpec, x: float) -> ModelSpec:
        return spec.with_changes(U=x * U_c, V=np.zeros((spec.n, spec.n)), W=x * W_c)

    return build


def _fig7(base: ModelSpec) -> Callable[[ModelSpec, float], ModelSpec]:
    eps = base.epsilon
    U = FIG7_COUPLING * np.eye(base.n)
    W = _offdiag(np.full((base.n, base.n), FIG7_COUPLING))

    def build(spec: ModelSpec, x: float) -> ModelSpec:
        return spec.with_changes(epsilon=x * eps, U=U, V=np.zeros((spec.n, spec.n)), W=W)

    return build


def resolve_param_path(path: str, base: ModelSpec) -> ParameterFamily:
    """Turn a parameter path into a family around `base`.

    Raises:
        ConfigError: For an unknown path.
    """
    prefix, _, name = path.partition(":")
    if prefix == "scale" and name in SCALE_FIELDS:
        return ParameterFamily(path=path, base=base, build=_scale(name))
    if prefix == "lerp" and name in LERP_RECIPES:
        if name == "fig2":
            return ParameterFamily(
                path=path,
                base=base,
                build=_fig2(base),
                band_size=degeneracy_count(base.n, base.n_sites, False),
                critical=1.0,
            )
        band = num_occupation_sectors(base.n, base.n_sites)
        recipe = _fig6 if name == "fig6" else _fig7
        return ParameterFamily(
            path=path,
            base=base,
            build=recipe(base),
            band_size=band,
            critical=1.0 if name == "fig6" else 0.0,
        )
    known = [f"scale:{f}" for f in SCALE_FIELDS] + [f"lerp:{r}" for r in LERP_RECIPES]
    raise ConfigError(f"unknown parameter path '{path}' (expected one of: {', '.join(known)})")


def figure_base(recipe: str, n: int, n_sites: int, graph: GraphKind | str = GraphKind.RING) -> ModelSpec:
    """Zero-coupling base model carrying a recipe's single-site spectrum."""
    if recipe == "fig2":
        epsilon = fig2_epsilon(n)
    elif recipe in ("fig6", "fig7"):
        epsilon = fig6_epsilon(n)
    else:
        raise ConfigError(f"unknown recipe '{recipe}'")
    return ModelSpec.build(n, n_sites, epsilon, graph=graph)


def figure_family(recipe: str, n: int, n_sites: int, graph: GraphKind | str = GraphKind.RING) -> ParameterFamily:
    return resolve_param_path(f"lerp:{recipe}", figure_base(recipe, n, n_sites, graph))
