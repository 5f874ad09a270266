"""Steady-state occupations of dissipative non-reciprocal chains.

The stationary balance equations form a linear system ``M n = b`` where
``M[i, i] = sum_j g[i, j] + kappa_i``, ``M[i, j] = -g[j, i]`` and
``b_i = kappa_i * n_th_i``.  Every column of ``M`` sums to the dissipation
rate of its mode, which makes ``M`` an M-matrix that turns nearly singular as
``kappa -> 0``: a generic LU solve then loses all significant digits (the
condition number grows like ``t**2 / kappa**2``).  The solver below performs
a GTH-style subtraction-free elimination that carries the dissipation slack
explicitly, so every intermediate quantity is a sum, product or quotient of
nonnegative numbers.  Each occupation therefore comes out with componentwise
relative accuracy of a few ulps regardless of how small ``kappa`` is, and is
nonnegative by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRegime, SingularSystem
from .model import Bond, ChainSpec, ModeParams, build_rate_matrix

__all__ = [
    "SteadyState",
    "AttachedModeSpec",
    "solve_steady_rates",
    "solve_steady_chain",
    "closed_form_two_mode",
    "plateau_limit",
    "solve_with_attached",
    "attached_mode_estimate",
]


@dataclass(frozen=True)
class SteadyState:
    """Stationary occupations together with the balance-equation residual.

    ``residual`` is the max-norm of ``M n - b`` evaluated in extended
    precision on the returned occupations.  Because the occupations are
    stored as doubles it cannot drop below roughly ``eps * max_i sum_j
    |M[i, j]| n_j``, which exceeds ``1e-10 * |b|`` once ``kappa`` is small;
    the occupations themselves remain componentwise accurate there.
    """

    occupations: np.ndarray
    residual: float


@dataclass(frozen=True)
class AttachedModeSpec:
    """A reciprocally coupled extra mode hung off the first chain site.

    ``coupling`` is the (real) Hermitian amplitude between the extra mode and
    mode 1 of the chain; ``n_th`` defaults to the bath occupation of the
    chain's first mode.
    """

    coupling: float
    kappa: float
    n_th: float | None = None

    def __post_init__(self) -> None:
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.n_th is not None and self.n_th < 0:
            raise ValueError("n_th must be >= 0")


def _gth_solve(rates: np.ndarray, slack: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the balance system by subtraction-free elimination.

    ``rates[i, j] >= 0`` is the transition rate i -> j, ``slack[i] >= 0`` the
    dissipation of mode i and ``rhs[i] >= 0`` the bath injection.  Factors the
    transposed system and keeps the row-sum slack through the elimination, so
    no cancellation ever occurs.
    """
    n = len(slack)
    w = np.array(rates, dtype=float)  # current off-diagonal magnitudes
    s = np.array(slack, dtype=float)
    lower = np.zeros((n, n))
    pivot = np.zeros(n)
    for k in range(n - 1):
        pivot[k] = w[k, k + 1 :].sum() + s[k]
        if pivot[k] == 0.0:
            raise SingularSystem(
                f"mode {k} has neither outgoing transitions nor dissipation"
            )
        mult = w[k + 1 :, k] / pivot[k]
        lower[k + 1 :, k] = mult
        w[k + 1 :, k + 1 :] += np.outer(mult, w[k, k + 1 :])
        s[k + 1 :] += mult * s[k]
    pivot[n - 1] = s[n - 1]
    if pivot[n - 1] == 0.0:
        raise SingularSystem("chain carries no dissipation at all")

    z = np.zeros(n)
    for k in range(n):
        z[k] = (rhs[k] + w[:k, k] @ z[:k]) / pivot[k]
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = z[k] + lower[k + 1 :, k] @ x[k + 1 :]
    return x


def _residual(rates: np.ndarray, kappa: np.ndarray, injection: np.ndarray,
              occupations: np.ndarray) -> float:
    # Evaluated in extended precision so the reported number reflects the
    # solution, not the evaluation.
    g = rates.astype(np.longdouble)
    k = kappa.astype(np.longdouble)
    x = occupations.astype(np.longdouble)
    balance = (g.sum(axis=1) + k) * x - g.T @ x - injection.astype(np.longdouble)
    return float(np.abs(balance).max())


def solve_steady_rates(
    rates: np.ndarray, kappa: np.ndarray, n_th: np.ndarray
) -> SteadyState:
    """Stationary occupations for an arbitrary nonnegative rate matrix.

    Mode ``i`` exchanges excitations with mode ``j`` at rate ``rates[i, j]``
    and relaxes toward ``n_th[i]`` at rate ``kappa[i]``.  Diagonal entries of
    ``rates`` are ignored.  For uniform ``kappa`` and ``n_th`` the solution
    satisfies ``sum_i n_i = n_modes * n_th`` whatever the rates are.

    Raises
    ------
    SingularSystem
        If no mode carries dissipation, or some modes are disconnected from
        every bath.
    """
    g = np.asarray(rates, dtype=float).copy()
    kappa = np.asarray(kappa, dtype=float)
    n_th = np.asarray(n_th, dtype=float)
    n = len(kappa)
    if g.shape != (n, n):
        raise ValueError(f"rates must be {n} x {n}, got {g.shape}")
    if np.any(g < 0) or np.any(kappa < 0) or np.any(n_th < 0):
        raise ValueError("rates, kappa and n_th must all be nonnegative")
    if not np.any(kappa > 0):
        raise SingularSystem(
            "all kappa vanish; the stationary state is not unique"
        )
    np.fill_diagonal(g, 0.0)
    injection = kappa * n_th
    occ = _gth_solve(g, kappa, injection)
    return SteadyState(occupations=occ, residual=_residual(g, kappa, injection, occ))


def solve_steady_chain(spec: ChainSpec) -> SteadyState:
    """Stationary occupations of a chain, from its transition-rate matrix."""
    rates = build_rate_matrix(spec).rates
    return solve_steady_rates(rates, spec.kappa_vector(), spec.n_th_vector())


def closed_form_two_mode(
    coupling: float,
    asymmetry: float,
    kappa_1: float,
    kappa_2: float,
    n_th: float,
) -> tuple[float, float]:
    """Exact stationary occupations of the canonical two-mode system.

    Solves the 2 x 2 balance system in closed form; for ``kappa_1 == kappa_2
    == kappa`` this reduces to ``n_1 = (2 g_21 + kappa) n_th / (g_12 + g_21 +
    kappa)``.
    """
    if not (kappa_1 > 0 and kappa_2 > 0):
        raise ValueError("both dissipation rates must be positive")
    two_mode = ChainSpec(
        modes=(ModeParams(kappa_1, n_th), ModeParams(kappa_2, n_th)),
        bonds=(Bond(coupling * math.exp(asymmetry), coupling * math.exp(-asymmetry)),),
        reference_coupling=coupling,
    )
    g = build_rate_matrix(two_mode).rates
    g12, g21 = g[0, 1], g[1, 0]
    det = g12 * kappa_2 + kappa_1 * g21 + kappa_1 * kappa_2
    n1 = n_th * (kappa_1 * g21 + kappa_1 * kappa_2 + g21 * kappa_2) / det
    n2 = n_th * (kappa_2 * g12 + kappa_1 * kappa_2 + g12 * kappa_1) / det
    return n1, n2


def plateau_limit(
    coupling: float, asymmetry: float, kappa: float, n_th: float
) -> float:
    """Long-chain floor of the cold-edge occupation at fixed dissipation.

    Returns ``kappa**2 * n_th / (kappa**2 + t_fwd**2 - t_bwd**2)`` with
    ``t_fwd = t exp(A)`` and ``t_bwd = t exp(-A)``; only meaningful for
    positive asymmetry, where the denominator is positive.
    """
    if asymmetry <= 0:
        raise InvalidRegime(
            f"the plateau formula needs asymmetry > 0, got {asymmetry}"
        )
    if not coupling > 0 or not kappa > 0:
        raise ValueError("coupling and kappa must be positive")
    if n_th < 0:
        raise ValueError("n_th must be >= 0")
    k2 = kappa * kappa
    gap = coupling * coupling * (math.exp(2 * asymmetry) - math.exp(-2 * asymmetry))
    return k2 * n_th / (k2 + gap)


def solve_with_attached(spec: ChainSpec, attached: AttachedModeSpec) -> SteadyState:
    """Stationary occupations with an extra reciprocal mode on the cold edge.

    The extra mode couples Hermitianly (amplitude ``attached.coupling``) to
    the chain's first mode, forming an ``n_modes + 1`` chain that is solved
    exactly; the result lists the attached mode first.
    """
    n_th0 = attached.n_th if attached.n_th is not None else spec.modes[0].n_th
    extended = ChainSpec(
        modes=(ModeParams(attached.kappa, n_th0),) + spec.modes,
        bonds=(Bond(attached.coupling, attached.coupling),) + spec.bonds,
        reference_coupling=spec.reference_coupling,
    )
    return solve_steady_chain(extended)


def attached_mode_estimate(
    attached: AttachedModeSpec,
    kappa_edge: float,
    n_1: float,
    n_th: float,
) -> float:
    """Closed-form estimate of the attached mode's occupation.

    Uses the reciprocal rate ``g_0 = 4 t_0**2 / (kappa_edge + kappa_0)`` and
    balances it against the attached mode's own bath:
    ``n_0 = (g_0 n_1 + kappa_0 n_th) / (g_0 + kappa_0)``.  ``n_1`` is the
    (separately computed) occupation of the chain site it couples to.
    """
    denom_rate = kappa_edge + attached.kappa
    if denom_rate <= 0:
        raise ValueError("kappa_edge + attached.kappa must be positive")
    g0 = 4.0 * attached.coupling * attached.coupling / denom_rate
    if g0 == 0.0 and attached.kappa == 0.0:
        raise ValueError("decoupled bathless mode has no defined occupation")
    return (g0 * n_1 + attached.kappa * n_th) / (g0 + attached.kappa)
