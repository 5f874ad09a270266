"""Chain descriptions and the derived single-particle and transition-rate matrices.

The central object is a :class:`ChainSpec`: an open chain of bosonic modes,
each damped by its own thermal bath, with nearest-neighbour hopping that may
be non-reciprocal.  Bond ``k`` carries amplitude ``t_fwd`` for hops from site
``k`` to site ``k + 1`` and ``t_bwd`` for the reverse direction; the canonical
non-reciprocal parameterization is ``t_fwd = t * exp(A)`` and
``t_bwd = t * exp(-A)`` with real asymmetry ``A``.

Conventions used throughout the package:

* the hopping matrix ``h`` has ``h[k + 1, k] = t_fwd`` and ``h[k, k + 1] =
  t_bwd``, so a single-excitation amplitude vector evolves under
  ``i dc/dtau = h c`` and the forward amplitude transports excitations toward
  higher site index;
* energies and rates are measured in units of the reference coupling, time in
  units of its inverse;
* the rotating frame removes all on-site energies, so ``h`` has zero diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentRate

__all__ = [
    "ModeParams",
    "Bond",
    "ChainSpec",
    "HoppingMatrix",
    "RateMatrix",
    "make_uniform_chain",
    "make_alternating_chain",
    "build_hopping_matrix",
    "build_rate_matrix",
    "chain_to_config",
    "chain_from_config",
]


@dataclass(frozen=True)
class ModeParams:
    """Dissipation rate and thermal bath occupation of one mode."""

    kappa: float
    n_th: float

    def __post_init__(self) -> None:
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")


@dataclass(frozen=True)
class Bond:
    """Directed coupling amplitudes of one nearest-neighbour bond.

    ``t_fwd`` moves an excitation toward higher site index, ``t_bwd`` toward
    lower.  Complex amplitudes are representable; individual solvers may
    impose stricter requirements (see :mod:`nhcool.spectral`).
    """

    t_fwd: complex
    t_bwd: complex


@dataclass(frozen=True)
class ChainSpec:
    """Full physical description of an open-boundary chain.

    ``bonds`` must have exactly one entry fewer than ``modes``; the list
    simply ending encodes the open boundary.  ``reference_coupling`` is the
    energy unit and is used only for bookkeeping.
    """

    modes: tuple[ModeParams, ...]
    bonds: tuple[Bond, ...]
    reference_coupling: float = 1.0

    def __post_init__(self) -> None:
        if len(self.modes) < 1:
            raise ValueError("a chain needs at least one mode")
        if len(self.bonds) != len(self.modes) - 1:
            raise ValueError(
                f"open chain with {len(self.modes)} modes needs "
                f"{len(self.modes) - 1} bonds, got {len(self.bonds)}"
            )
        if not self.reference_coupling > 0:
            raise ValueError("reference_coupling must be positive")

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def kappa_vector(self) -> np.ndarray:
        return np.array([m.kappa for m in self.modes], dtype=float)

    def n_th_vector(self) -> np.ndarray:
        return np.array([m.n_th for m in self.modes], dtype=float)


@dataclass(frozen=True)
class HoppingMatrix:
    """Single-particle hopping matrix plus its Hermiticity flag."""

    matrix: np.ndarray
    is_hermitian: bool


@dataclass(frozen=True)
class RateMatrix:
    """Nonnegative nearest-neighbour transition rates.

    ``rates[i, j]`` is the rate at which excitations hop from mode ``i`` to
    mode ``j``; entries are nonzero only on the two off-diagonals.
    """

    rates: np.ndarray


def _canonical_bond(coupling: float, asymmetry: float) -> Bond:
    return Bond(coupling * math.exp(asymmetry), coupling * math.exp(-asymmetry))


def _check_chain_args(n_modes: int, kappa: float, n_th: float) -> None:
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if n_th < 0:
        raise ValueError(f"n_th must be >= 0, got {n_th}")


def make_uniform_chain(
    n_modes: int,
    coupling: float = 1.0,
    asymmetry: float = 0.0,
    kappa: float = 0.0,
    n_th: float = 0.0,
) -> ChainSpec:
    """Build a uniform non-reciprocal chain.

    Parameters
    ----------
    n_modes : int
        Number of modes, at least 1.
    coupling : float
        Geometric-mean hopping amplitude ``t`` (positive); also the energy
        unit of the returned chain.
    asymmetry : float
        Real asymmetry exponent; each bond carries ``t * exp(+-asymmetry)``.
    kappa, n_th : float
        Dissipation rate and bath occupation, identical for every mode.
    """
    _check_chain_args(n_modes, kappa, n_th)
    if not coupling > 0:
        raise ValueError(f"coupling must be positive, got {coupling}")
    modes = (ModeParams(kappa, n_th),) * n_modes
    bonds = (_canonical_bond(coupling, asymmetry),) * (n_modes - 1)
    return ChainSpec(modes=modes, bonds=bonds, reference_coupling=coupling)


def make_alternating_chain(
    n_modes: int,
    coupling_odd: float,
    asymmetry_odd: float,
    coupling_even: float,
    asymmetry_even: float,
    kappa: float = 0.0,
    n_th: float = 0.0,
) -> ChainSpec:
    """Build a two-sublattice chain whose bonds alternate between two types.

    The first, third, fifth, ... bonds use ``(coupling_odd, asymmetry_odd)``,
    the bonds in between use ``(coupling_even, asymmetry_even)``.  With equal
    parameters this reduces exactly to :func:`make_uniform_chain`.
    """
    _check_chain_args(n_modes, kappa, n_th)
    if not coupling_odd > 0 or not coupling_even > 0:
        raise ValueError("couplings must be positive")
    odd = _canonical_bond(coupling_odd, asymmetry_odd)
    even = _canonical_bond(coupling_even, asymmetry_even)
    bonds = tuple(odd if k % 2 == 0 else even for k in range(n_modes - 1))
    modes = (ModeParams(kappa, n_th),) * n_modes
    return ChainSpec(modes=modes, bonds=bonds, reference_coupling=coupling_odd)


def build_hopping_matrix(spec: ChainSpec) -> HoppingMatrix:
    """Assemble the tridiagonal single-particle matrix of a chain.

    Returns the matrix together with a flag telling whether it is exactly
    Hermitian (true precisely when every bond satisfies
    ``t_bwd == conj(t_fwd)``).
    """
    n = spec.n_modes
    h = np.zeros((n, n), dtype=complex)
    for k, bond in enumerate(spec.bonds):
        h[k + 1, k] = bond.t_fwd
        h[k, k + 1] = bond.t_bwd
    hermitian = all(bond.t_bwd == np.conj(bond.t_fwd) for bond in spec.bonds)
    return HoppingMatrix(matrix=h, is_hermitian=bool(hermitian))


def build_rate_matrix(spec: ChainSpec) -> RateMatrix:
    """Compute the non-reciprocal transition rates of a chain.

    For the bond joining modes ``i`` and ``j = i + 1`` the rates are::

        g[i, j] = 2 * (|t_fwd|**2 + Re(t_fwd * t_bwd)) / (kappa_i + kappa_j)
        g[j, i] = 2 * (|t_bwd|**2 + Re(t_fwd * t_bwd)) / (kappa_i + kappa_j)

    Raises
    ------
    DivergentRate
        If a bond with nonzero amplitude joins two modes whose dissipation
        rates are both zero.
    ValueError
        If a (necessarily non-canonical) bond produces a negative rate.
    """
    n = spec.n_modes
    kappa = spec.kappa_vector()
    g = np.zeros((n, n), dtype=float)
    for k, bond in enumerate(spec.bonds):
        if bond.t_fwd == 0 and bond.t_bwd == 0:
            continue
        ksum = kappa[k] + kappa[k + 1]
        if ksum == 0.0:
            raise DivergentRate(
                f"bond {k} couples modes {k} and {k + 1} but kappa_{k} + "
                f"kappa_{k + 1} = 0; the transition rate diverges"
            )
        cross = (complex(bond.t_fwd) * complex(bond.t_bwd)).real
        fwd = 2.0 * (abs(bond.t_fwd) ** 2 + cross) / ksum
        bwd = 2.0 * (abs(bond.t_bwd) ** 2 + cross) / ksum
        if fwd < 0 or bwd < 0:
            raise ValueError(
                f"bond {k} produces a negative transition rate; the rate "
                "description only applies when |t|^2 + Re(t_fwd t_bwd) >= 0"
            )
        g[k, k + 1] = fwd
        g[k + 1, k] = bwd
    return RateMatrix(rates=g)


# --- configuration mapping -------------------------------------------------
#
# A chain serializes to a flat mapping with keys n_modes, t, A, kappa, n_th
# and an optional "bonds" list of per-bond overrides, each entry
# {"index": k, "t": ..., "A": ...}.  Only uniform-bath chains with real
# canonical bonds are expressible in this schema.


def _bond_to_t_a(bond: Bond) -> tuple[float, float]:
    fwd, bwd = complex(bond.t_fwd), complex(bond.t_bwd)
    if fwd.imag != 0 or bwd.imag != 0 or fwd.real <= 0 or bwd.real <= 0:
        raise ValueError("only bonds with positive real amplitudes serialize")
    t = math.sqrt(fwd.real * bwd.real)
    return t, 0.5 * math.log(fwd.real / bwd.real)


def chain_to_config(spec: ChainSpec) -> dict:
    """Serialize a chain to the flat configuration mapping.

    Requires uniform per-mode parameters and real positive bond amplitudes;
    bonds that differ from the first one are emitted as overrides.
    """
    kappas = {m.kappa for m in spec.modes}
    n_ths = {m.n_th for m in spec.modes}
    if len(kappas) != 1 or len(n_ths) != 1:
        raise ValueError("only chains with uniform mode parameters serialize")
    config = {
        "n_modes": spec.n_modes,
        "kappa": spec.modes[0].kappa,
        "n_th": spec.modes[0].n_th,
    }
    if spec.bonds:
        base_t, base_a = _bond_to_t_a(spec.bonds[0])
    else:
        base_t, base_a = spec.reference_coupling, 0.0
    config["t"] = base_t
    config["A"] = base_a
    overrides = []
    for k, bond in enumerate(spec.bonds):
        t, a = _bond_to_t_a(bond)
        if t != base_t or a != base_a:
            overrides.append({"index": k, "t": t, "A": a})
    if overrides:
        config["bonds"] = overrides
    return config


def chain_from_config(config: dict) -> ChainSpec:
    """Build a chain from the flat configuration mapping."""
    n_modes = int(config["n_modes"])
    t = float(config.get("t", 1.0))
    a = float(config.get("A", 0.0))
    kappa = float(config.get("kappa", 0.0))
    n_th = float(config.get("n_th", 0.0))
    spec = make_uniform_chain(n_modes, t, a, kappa, n_th)
    overrides = config.get("bonds") or []
    if not overrides:
        return spec
    bonds = list(spec.bonds)
    for entry in overrides:
        k = int(entry["index"])
        if not 0 <= k < len(bonds):
            raise ValueError(f"bond override index {k} out of range")
        bond_t = float(entry.get("t", t))
        bond_a = float(entry.get("A", a))
        if not bond_t > 0:
            raise ValueError("bond override coupling must be positive")
        bonds[k] = _canonical_bond(bond_t, bond_a)
    return ChainSpec(
        modes=spec.modes, bonds=tuple(bonds), reference_coupling=spec.reference_coupling
    )
