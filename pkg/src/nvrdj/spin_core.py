"""Spin-1 operator algebra and the static NV ground-state Hamiltonian.

The ground-state triplet of a negatively charged NV center is an S=1 system.
At zero external field its fine structure is set by the zero-field splitting

    H_D = D [Sz^2 - S(S+1)/3] + E (Sx^2 - Sy^2)

with D the axial and E the transverse (strain) splitting. The m_s = 0 level
sits at -2D/3; the m_s = +-1 pair is mixed by strain into the eigenstates
(|+1> +- |-1>)/sqrt(2) at D/3 +- E, so the two microwave transitions from
|0> sit at D - E and D + E.

Conventions used throughout the package:

* basis ordering is (|+1>, |0>, |-1>); index 1 is the m_s = 0 level
* all energies are frequencies in Hz (h = 1); propagators are
  exp(-i 2 pi H t)
* the driven simulation works in the strain eigenbasis, labelling the lower
  strain eigenstate "|-1>" (qubit partner, transition D - E) and the upper
  one "|+1>" (auxiliary level, transition D + E), matching how the two
  resonance lines are addressed
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Measured device parameters for the simulated nanodiamond sample.
ZFS_D_HZ = 2.8449e9
ZFS_E_HZ = 19.5e6

# Basis indices, ordering (|+1>, |0>, |-1>).
IDX_PLUS = 0
IDX_ZERO = 1
IDX_MINUS = 2

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ZfsParams:
    """Zero-field splitting constants, both in Hz."""

    d_hz: float
    e_hz: float

    def __post_init__(self):
        if self.d_hz < 0:
            raise ValueError(f"axial splitting D must be >= 0, got {self.d_hz}")
        if self.e_hz < 0:
            raise ValueError(f"strain splitting E must be >= 0, got {self.e_hz}")
        # E >= D would push a strain eigenstate below |0>; the only allowed
        # boundary case is the trivial D = E = 0 Hamiltonian.
        if self.e_hz >= self.d_hz and not (self.d_hz == 0 and self.e_hz == 0):
            raise ValueError(
                f"require E < D for a physical level structure, got D={self.d_hz}, E={self.e_hz}"
            )


DEFAULT_ZFS = ZfsParams(d_hz=ZFS_D_HZ, e_hz=ZFS_E_HZ)


@dataclass(frozen=True)
class SpinOperators:
    """Dimensionless spin-1 matrices in the (|+1>, |0>, |-1>) basis."""

    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray


@dataclass(frozen=True)
class LevelStructure:
    """Eigenenergies of the zero-field Hamiltonian and the two transitions.

    Energies in Hz relative to the traceless H_D; `f_low`/`f_high` are the
    |0> <-> lower/upper strain eigenstate transition frequencies.
    """

    e_zero: float
    e_minus: float
    e_plus: float
    f_low: float
    f_high: float


def spin1_operators() -> SpinOperators:
    """Return the canonical S=1 matrices, <m'|S+-|m> = sqrt(2 - m(m+-1))."""
    sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _SQRT2
    sy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _SQRT2
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return SpinOperators(sx=sx, sy=sy, sz=sz)


def zero_field_hamiltonian(params: ZfsParams) -> np.ndarray:
    """Zero-field Hamiltonian D[Sz^2 - S(S+1)/3] + E(Sx^2 - Sy^2) in Hz.

    Traceless and Hermitian. Eigenvalues are {-2D/3, D/3 - E, D/3 + E};
    the -2D/3 eigenvector is |0> and the strain pair is (|+1> +- |-1>)/sqrt2.
    """
    ops = spin1_operators()
    sz2 = ops.sz @ ops.sz
    sx2 = ops.sx @ ops.sx
    sy2 = ops.sy @ ops.sy
    h = params.d_hz * (sz2 - (2.0 / 3.0) * np.eye(3)) + params.e_hz * (sx2 - sy2)
    return h


def transition_frequencies(params: ZfsParams) -> tuple[float, float]:
    """Return (f_low, f_high) = (D - E, D + E), the two lines from |0>."""
    return (params.d_hz - params.e_hz, params.d_hz + params.e_hz)


def level_structure(params: ZfsParams) -> LevelStructure:
    """Analytic eigenstructure of the zero-field Hamiltonian."""
    f_low, f_high = transition_frequencies(params)
    e_zero = -2.0 * params.d_hz / 3.0
    return LevelStructure(
        e_zero=e_zero,
        e_minus=params.d_hz / 3.0 - params.e_hz,
        e_plus=params.d_hz / 3.0 + params.e_hz,
        f_low=f_low,
        f_high=f_high,
    )
