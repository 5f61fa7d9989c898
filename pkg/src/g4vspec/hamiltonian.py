"""Electro-nuclear Hamiltonian of a group-IV color center.

A single hole with orbital doublet {|e+>, |e->} and spin-1/2 couples to
the intrinsic dopant nucleus (spin I).  The full basis is
orbital (x) electron-spin (x) nuclear-spin with dimension 4(2I+1), the
quantization axis is the defect symmetry axis, and every term is returned
in MHz (E/h).  GHz-scale inputs (spin-orbit splitting, strain) are
converted at the term boundary.

Terms:
    spin-orbit      (lambda/2) sz_orb sz_spin
    strain          -alpha sx_orb - beta sy_orb
    Zeeman          g mu_B B.S  +  q mu_B Bz sz_orb  +  g_I mu_N B.I
    hyperfine       A_perp (Sx Ix + Sy Iy) + A_par Sz Iz,
                    A_par = A_FC + A_DD,  A_perp = A_FC - 2 A_DD
    quadobs         Q (Iz^2 - I(I+1)/3)          (I > 1/2 only, traceless)
    nuclear SOC     (upsilon/2) sz_orb Iz
"""
import dataclasses
from dataclasses import dataclass

import numpy as np

from .spinops import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, kron, spin_matrices

__all__ = [
    "MU_B_MHZ_PER_T",
    "MU_N_MHZ_PER_T",
    "DEFAULT_G_ELECTRON",
    "ManifoldParams",
    "EmitterModel",
    "term_soc",
    "term_strain",
    "term_zeeman",
    "term_hyperfine",
    "term_quadrupole",
    "term_ioc",
    "build_hamiltonian",
    "a_parallel",
    "a_perp",
    "a_ple",
    "jsq_operator",
    "jt_shifted_params",
    "registry_labels",
    "registry_lookup",
]

# CODATA magnetons as frequencies, MHz/T.
MU_B_MHZ_PER_T = 13996.2449
MU_N_MHZ_PER_T = 7.622593
DEFAULT_G_ELECTRON = 2.0023

GHZ = 1000.0  # exact GHz -> MHz

MANIFOLDS = ("gnd", "exc")


def _finite(name, value):
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class ManifoldParams:
    """Per-manifold constants: spin-orbit splitting, orbital Zeeman response,
    and the hyperfine/quadrupole/nuclear-SOC couplings."""

    lambda_soc_ghz: float
    q_orb: float = 0.1
    a_fc_mhz: float = 0.0
    a_dd_mhz: float = 0.0
    quad_q_mhz: float = 0.0
    ioc_upsilon_mhz: float = 0.0

    def __post_init__(self):
        for name in ("lambda_soc_ghz", "q_orb", "a_fc_mhz", "a_dd_mhz",
                     "quad_q_mhz", "ioc_upsilon_mhz"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.lambda_soc_ghz < 0:
            raise ValueError(f"lambda_soc_ghz must be >= 0, got {self.lambda_soc_ghz}")


@dataclass(frozen=True)
class EmitterModel:
    """Complete emitter description: nucleus, g-factors, shared strain, and
    ground/excited manifold parameters."""

    isotope: str
    nuclear_spin: float
    g_nuclear: float
    gnd: ManifoldParams
    exc: ManifoldParams
    g_electron: float = DEFAULT_G_ELECTRON
    strain_alpha_ghz: float = 0.0
    strain_beta_ghz: float = 0.0

    def __post_init__(self):
        two_i = 2.0 * self.nuclear_spin
        if self.nuclear_spin < 0 or abs(two_i - round(two_i)) > 1e-9:
            raise ValueError(
                f"nuclear_spin must be a non-negative half-integer, got {self.nuclear_spin}"
            )
        _finite("g_nuclear", self.g_nuclear)
        _finite("g_electron", self.g_electron)
        _finite("strain_alpha_ghz", self.strain_alpha_ghz)
        _finite("strain_beta_ghz", self.strain_beta_ghz)
        for name in MANIFOLDS:
            p = getattr(self, name)
            if p.lambda_soc_ghz <= 0:
                raise ValueError(f"{name}: emitter spin-orbit splitting must be positive")
            if p.quad_q_mhz != 0.0 and self.nuclear_spin <= 0.5:
                raise ValueError(
                    f"{name}: quadrupole coupling requires nuclear spin > 1/2 "
                    f"(I = {self.nuclear_spin})"
                )

    @property
    def nuclear_dim(self) -> int:
        return int(round(2.0 * self.nuclear_spin)) + 1

    @property
    def dim(self) -> int:
        return 4 * self.nuclear_dim

    def manifold(self, which: str) -> ManifoldParams:
        if which not in MANIFOLDS:
            raise ValueError(f"manifold must be one of {MANIFOLDS}, got {which!r}")
        return getattr(self, which)

    def without_couplings(self) -> "EmitterModel":
        """Copy with hyperfine, quadrupole and nuclear-SOC couplings zeroed.

        Strain, spin-orbit and Zeeman responses are kept; this is the
        reference system that defines the unperturbed C line.
        """
        strip = dict(a_fc_mhz=0.0, a_dd_mhz=0.0, quad_q_mhz=0.0, ioc_upsilon_mhz=0.0)
        return dataclasses.replace(
            self,
            gnd=dataclasses.replace(self.gnd, **strip),
            exc=dataclasses.replace(self.exc, **strip),
        )

    def scaled_hyperfine(self, scale: float) -> "EmitterModel":
        """Copy with A_FC and A_DD of both manifolds multiplied by one factor."""
        return dataclasses.replace(
            self,
            gnd=dataclasses.replace(
                self.gnd, a_fc_mhz=scale * self.gnd.a_fc_mhz, a_dd_mhz=scale * self.gnd.a_dd_mhz
            ),
            exc=dataclasses.replace(
                self.exc, a_fc_mhz=scale * self.exc.a_fc_mhz, a_dd_mhz=scale * self.exc.a_dd_mhz
            ),
        )


def _nuclear_identity(i) -> np.ndarray:
    return np.eye(int(round(2.0 * float(i))) + 1, dtype=complex)


def term_soc(params: ManifoldParams, i) -> np.ndarray:
    """Spin-orbit term (lambda/2) sz_orb sz_spin, MHz."""
    one_n = _nuclear_identity(i)
    return 0.5 * params.lambda_soc_ghz * GHZ * kron(SIGMA_Z, SIGMA_Z, one_n)


def term_strain(alpha_ghz: float, beta_ghz: float, i) -> np.ndarray:
    """Transverse-strain term -alpha sx_orb - beta sy_orb, inputs GHz."""
    one_n = _nuclear_identity(i)
    return -alpha_ghz * GHZ * kron(SIGMA_X, IDENTITY_2, one_n) \
        - beta_ghz * GHZ * kron(SIGMA_Y, IDENTITY_2, one_n)


def term_zeeman(emitter: EmitterModel, manifold: str, b) -> np.ndarray:
    """Electron-spin, orbital (axial, factor q) and nuclear Zeeman terms, MHz.

    b is the magnetic field vector in Tesla.
    """
    bx, by, bz = (float(c) for c in b)
    for c in (bx, by, bz):
        _finite("magnetic field component", c)
    params = emitter.manifold(manifold)
    nuc = spin_matrices(emitter.nuclear_spin)
    one_n = _nuclear_identity(emitter.nuclear_spin)

    ge_mub = emitter.g_electron * MU_B_MHZ_PER_T
    h = 0.5 * ge_mub * (
        bx * kron(IDENTITY_2, SIGMA_X, one_n)
        + by * kron(IDENTITY_2, SIGMA_Y, one_n)
        + bz * kron(IDENTITY_2, SIGMA_Z, one_n)
    )
    h += params.q_orb * MU_B_MHZ_PER_T * bz * kron(SIGMA_Z, IDENTITY_2, one_n)
    gi_mun = emitter.g_nuclear * MU_N_MHZ_PER_T
    h += gi_mun * (
        bx * kron(IDENTITY_2, IDENTITY_2, nuc.x)
        + by * kron(IDENTITY_2, IDENTITY_2, nuc.y)
        + bz * kron(IDENTITY_2, IDENTITY_2, nuc.z)
    )
    return h


def term_hyperfine(params: ManifoldParams, i) -> np.ndarray:
    """A_perp (Sx Ix + Sy Iy) + A_par Sz Iz on spin (x) nucleus, MHz."""
    nuc = spin_matrices(i)
    apar = a_parallel(params)
    aperp = a_perp(params)
    h = aperp * (
        kron(IDENTITY_2, 0.5 * SIGMA_X, nuc.x) + kron(IDENTITY_2, 0.5 * SIGMA_Y, nuc.y)
    )
    h += apar * kron(IDENTITY_2, 0.5 * SIGMA_Z, nuc.z)
    return h


def term_quadrupole(params: ManifoldParams, i) -> np.ndarray:
    """Axial quadrupole term Q (Iz^2 - I(I+1)/3), traceless, zero for I <= 1/2."""
    i = float(i)
    nuc = spin_matrices(i)
    dim_n = nuc.dim
    if i <= 0.5:
        return np.zeros((4 * dim_n, 4 * dim_n), dtype=complex)
    casimir = i * (i + 1.0) / 3.0
    quad = nuc.z @ nuc.z - casimir * np.eye(dim_n, dtype=complex)
    return params.quad_q_mhz * kron(IDENTITY_2, IDENTITY_2, quad)


def term_ioc(params: ManifoldParams, i) -> np.ndarray:
    """Nuclear spin-orbit term (upsilon/2) sz_orb Iz, MHz."""
    nuc = spin_matrices(i)
    return 0.5 * params.ioc_upsilon_mhz * kron(SIGMA_Z, IDENTITY_2, nuc.z)


def build_hamiltonian(emitter: EmitterModel, manifold: str, b=(0.0, 0.0, 0.0),
                      alpha_ghz: float | None = None,
                      beta_ghz: float | None = None) -> np.ndarray:
    """Full Hermitian Hamiltonian of one manifold at field b (Tesla), MHz.

    Strain defaults to the emitter's shared alpha/beta and can be
    overridden per call.
    """
    params = emitter.manifold(manifold)
    i = emitter.nuclear_spin
    alpha = emitter.strain_alpha_ghz if alpha_ghz is None else float(alpha_ghz)
    beta = emitter.strain_beta_ghz if beta_ghz is None else float(beta_ghz)
    h = term_soc(params, i)
    h = h + term_strain(alpha, beta, i)
    h = h + term_zeeman(emitter, manifold, b)
    h = h + term_hyperfine(params, i)
    h = h + term_quadrupole(params, i)
    h = h + term_ioc(params, i)
    return h


def a_parallel(params: ManifoldParams) -> float:
    """Axial hyperfine shift A_FC + A_DD, MHz."""
    return params.a_fc_mhz + params.a_dd_mhz


def a_perp(params: ManifoldParams) -> float:
    """Transverse hyperfine mixing A_FC - 2 A_DD, MHz."""
    return params.a_fc_mhz - 2.0 * params.a_dd_mhz


def a_ple(emitter: EmitterModel) -> float:
    """Optical hyperfine spacing between hyperfine-split C lines, MHz.

    Half the difference of the axial couplings of the two manifolds,
    (A_par_exc - A_par_gnd)/2; negative for every tabulated isotope.
    """
    return 0.5 * (a_parallel(emitter.exc) - a_parallel(emitter.gnd))


def jsq_operator(i) -> np.ndarray:
    """Total electro-nuclear angular momentum squared, J = S + I, full basis."""
    nuc = spin_matrices(i)
    one_n = _nuclear_identity(i)
    jx = kron(IDENTITY_2, 0.5 * SIGMA_X, one_n) + kron(IDENTITY_2, IDENTITY_2, nuc.x)
    jy = kron(IDENTITY_2, 0.5 * SIGMA_Y, one_n) + kron(IDENTITY_2, IDENTITY_2, nuc.y)
    jz = kron(IDENTITY_2, 0.5 * SIGMA_Z, one_n) + kron(IDENTITY_2, IDENTITY_2, nuc.z)
    return jx @ jx + jy @ jy + jz @ jz


def jt_shifted_params(params: ManifoldParams, delta_fc_mhz: float,
                      delta_dd_mhz: float) -> ManifoldParams:
    """Copy of params with the hyperfine couplings shifted by the given
    deltas (symmetry-lowering sensitivity studies)."""
    return dataclasses.replace(
        params,
        a_fc_mhz=params.a_fc_mhz + float(delta_fc_mhz),
        a_dd_mhz=params.a_dd_mhz + float(delta_dd_mhz),
    )


# Built-in registry: nuclear spin, nuclear g-factor, and first-principles
# hyperfine couplings (A_FC, A_DD) for ground and excited manifolds, MHz.
# Spin-0 reference isotopes carry zero couplings.
_HYPERFINE_TABLE = {
    "29Si": (0.5, -1.110, (64.20, -2.34), (-30.68, 32.57)),
    "73Ge": (4.5, -0.195, (48.23, -1.35), (5.03, 14.30)),
    "115Sn": (0.5, -1.836, (1275.04, -24.47), (386.74, 230.43)),
    "117Sn": (0.5, -2.000, (1389.09, -26.65), (421.34, 251.05)),
    "119Sn": (0.5, -2.092, (1453.27, -27.89), (440.80, 262.65)),
    "28Si": (0.0, 0.0, (0.0, 0.0), (0.0, 0.0)),
    "74Ge": (0.0, 0.0, (0.0, 0.0), (0.0, 0.0)),
    "118Sn": (0.0, 0.0, (0.0, 0.0), (0.0, 0.0)),
    "120Sn": (0.0, 0.0, (0.0, 0.0), (0.0, 0.0)),
}

# Spin-orbit splittings are not part of the hyperfine table; these are
# literature-typical (gnd, exc) defaults in GHz, overridable per lookup.
_LAMBDA_GHZ = {"Si": (46.0, 250.0), "Ge": (170.0, 980.0), "Sn": (850.0, 3000.0)}

# Orbital Zeeman response q per manifold.  The ground-state value ~0.1 is
# the usual quenched orbital g-factor; the excited manifold must differ
# from the ground one for the C-line to move with axial field at all
# (equal q cancels exactly in spin-conserving transitions), so a distinct
# default is used.  Both are plain configuration inputs.
_Q_ORB_DEFAULT = (0.10, 0.15)


def registry_labels() -> tuple:
    return tuple(_HYPERFINE_TABLE)


def _element_of(label: str) -> str:
    return "".join(ch for ch in label if ch.isalpha())


def registry_lookup(label: str, *, lambda_gnd_ghz: float | None = None,
                    lambda_exc_ghz: float | None = None,
                    q_gnd: float | None = None, q_exc: float | None = None,
                    g_electron: float | None = None,
                    strain_alpha_ghz: float = 0.0,
                    strain_beta_ghz: float = 0.0) -> EmitterModel:
    """Emitter prefilled from the built-in isotope table.

    The hyperfine couplings, nuclear spin and nuclear g-factor come from
    the table; spin-orbit splittings and orbital Zeeman responses are
    configuration inputs with documented defaults.
    """
    if label not in _HYPERFINE_TABLE:
        known = ", ".join(sorted(_HYPERFINE_TABLE))
        raise ValueError(f"unknown isotope label {label!r}; known labels: {known}")
    spin, g_i, (afc_g, add_g), (afc_e, add_e) = _HYPERFINE_TABLE[label]
    lam_g, lam_e = _LAMBDA_GHZ[_element_of(label)]
    qg, qe = _Q_ORB_DEFAULT
    gnd = ManifoldParams(
        lambda_soc_ghz=lam_g if lambda_gnd_ghz is None else float(lambda_gnd_ghz),
        q_orb=qg if q_gnd is None else float(q_gnd),
        a_fc_mhz=afc_g,
        a_dd_mhz=add_g,
    )
    exc = ManifoldParams(
        lambda_soc_ghz=lam_e if lambda_exc_ghz is None else float(lambda_exc_ghz),
        q_orb=qe if q_exc is None else float(q_exc),
        a_fc_mhz=afc_e,
        a_dd_mhz=add_e,
    )
    return EmitterModel(
        isotope=label,
        nuclear_spin=spin,
        g_nuclear=g_i,
        gnd=gnd,
        exc=exc,
        g_electron=DEFAULT_G_ELECTRON if g_electron is None else float(g_electron),
        strain_alpha_ghz=strain_alpha_ghz,
        strain_beta_ghz=strain_beta_ghz,
    )
