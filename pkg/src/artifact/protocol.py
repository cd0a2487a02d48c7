"""Figures of merit for the heralded ion-donor entanglement protocol.

Basis ordering for two-qubit states is ``|Yb, In>``:
``|0,0>, |0,1>, |1,0>, |1,1>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleError, UnderdeterminedError

BASIS = ("00", "01", "10", "11")
BALANCE_KEYS = ("p1_yb", "p1_in", "p2_yb", "p2_in")


@dataclass(frozen=True)
class ProtocolParams:
    p1_yb: float = 0.05
    p1_in: float = 0.05
    p2_yb: float = 0.32
    p2_in: float = 0.34
    eta: float = 0.80
    f_dyn: float = 0.96
    delta_phi: float = 0.0
    t_init: float = 1.0  # us, optical pumping
    t_pulse: float = 0.01  # us, excitation
    t_readout: float = 10.0  # us, readout after a herald

    def __post_init__(self):
        for name in ("p1_yb", "p1_in", "p2_yb", "p2_in", "eta", "f_dyn"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        for name in ("t_init", "t_pulse", "t_readout"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be >= 0")

    def replace(self, **changes) -> "ProtocolParams":
        return ProtocolParams(**{**asdict(self), **changes})


def double_excitation_factor(p: ProtocolParams) -> float:
    """Relative amplitude ``c1`` of false heralds from double excitations with one photon lost."""
    denom = (1.0 - p.p1_in) * p.p2_yb
    if denom <= 0.0:
        raise InfeasibleError("c1 undefined: need p1_in < 1 and p2_yb > 0")
    num = p.p1_in * (p.p2_yb * (1.0 - p.p2_in) + p.p2_in * (1.0 - p.p2_yb))
    return math.sqrt(num / denom)


def fidelity(c1: float, f_dyn: float, re_overlap: float, epsilon: float = 0.0,
             overlap: Optional[complex] = None) -> float:
    """Heralded-state fidelity ``(1 + f_dyn Re O) / (2 + c1^2)``.

    With ``epsilon`` (residual interferometer phase) the overlap term becomes
    ``Re(exp(i epsilon) O)``; pass the complex ``overlap`` for that to matter.
    """
    if overlap is not None:
        re_overlap = (cmath.exp(1j * epsilon) * overlap).real
    elif epsilon:
        re_overlap = re_overlap * math.cos(epsilon)
    if not -1.0 - 1e-12 <= re_overlap <= 1.0 + 1e-12:
        raise ValueError(f"Re(O) must lie in [-1, 1], got {re_overlap}")
    return (1.0 + f_dyn * re_overlap) / (2.0 + c1 * c1)


def success_probability(p: ProtocolParams) -> float:
    return (p.p1_yb * p.p2_yb * (1.0 - p.p1_in) + p.p1_in * p.p2_in * (1.0 - p.p1_yb)) * p.eta


def entanglement_rate(p: ProtocolParams, p_succ: float) -> float:
    """Heralded pairs per ms (kHz); readout time is only spent on heralded runs."""
    if not 0.0 <= p_succ <= 1.0:
        raise ValueError(f"p_succ must lie in [0, 1], got {p_succ}")
    cycle = p.t_init + p.t_pulse + p_succ * p.t_readout  # us
    if cycle <= 0.0:
        if p_succ == 0.0:
            return 0.0
        raise InfeasibleError("zero cycle time")
    return 1e3 * p_succ / cycle


def balance_residual(p1_yb: float, p1_in: float, p2_yb: float, p2_in: float) -> float:
    """Difference of the two single-herald weights; zero for a maximally entangled herald."""
    return p1_yb * (1.0 - p1_in) * p2_yb - p1_in * (1.0 - p1_yb) * p2_in


def balance_solve(**known: float) -> tuple[str, float]:
    """Solve the balance condition for whichever of the four probabilities is missing.

    Exactly three of ``p1_yb, p1_in, p2_yb, p2_in`` must be given. Returns the
    missing name and its value.
    """
    unknown = [k for k in BALANCE_KEYS if k not in known]
    extra = set(known) - set(BALANCE_KEYS)
    if extra:
        raise TypeError(f"unexpected keys {sorted(extra)}")
    if len(unknown) != 1:
        raise TypeError("give exactly three of p1_yb, p1_in, p2_yb, p2_in")
    (name,) = unknown
    for k, v in known.items():
        if not 0.0 <= v <= 1.0:
            raise InfeasibleError(f"{k}={v} outside [0, 1]")

    if name in ("p1_yb", "p1_in"):
        other = "p1_in" if name == "p1_yb" else "p1_yb"
        # odds(p1_x) * p2_x = odds(p1_other) * p2_other
        p_own = known["p2_yb"] if name == "p1_yb" else known["p2_in"]
        p_other = known["p2_in"] if name == "p1_yb" else known["p2_yb"]
        q = known[other]
        if q == 1.0:
            raise InfeasibleError(f"{other}=1 makes the balance condition unsatisfiable below 1")
        if p_own == 0.0:
            if q * p_other == 0.0:
                raise UnderdeterminedError(f"underdetermined: any {name} balances")
            raise InfeasibleError(f"{'p2_yb' if name == 'p1_yb' else 'p2_in'}=0 cannot balance a nonzero herald")
        odds = q / (1.0 - q) * p_other / p_own
        return name, odds / (1.0 + odds)

    # solving for a collection efficiency
    p1_yb, p1_in = known["p1_yb"], known["p1_in"]
    w_yb = p1_yb * (1.0 - p1_in)
    w_in = p1_in * (1.0 - p1_yb)
    if name == "p2_in":
        if w_in == 0.0:
            if w_yb * known["p2_yb"] == 0.0:
                raise UnderdeterminedError("underdetermined: both herald weights vanish for any p2_in")
            raise InfeasibleError("p1_in(1 - p1_yb) = 0: no p2_in can balance")
        value = w_yb * known["p2_yb"] / w_in
    else:
        if w_yb == 0.0:
            if w_in * known["p2_in"] == 0.0:
                raise UnderdeterminedError("underdetermined: both herald weights vanish for any p2_yb")
            raise InfeasibleError("p1_yb(1 - p1_in) = 0: no p2_yb can balance")
        value = w_in * known["p2_in"] / w_yb
    if value > 1.0:
        raise InfeasibleError(f"balance requires {name}={value:.6g} > 1")
    return name, value


def reduced_density_matrix(overlap: complex, delta_phi: float, c1: float) -> np.ndarray:
    """Heralded two-qubit state after tracing out the photon modes.

    Populations ``1/(2+c1^2)`` on |0,1> and |1,0>, ``c1^2/(2+c1^2)`` on |1,1>,
    and the which-path coherence ``-i exp(i delta_phi) O / (2+c1^2)`` on |0,1><1,0|.
    """
    if abs(overlap) > 1.0 + 1e-12:
        raise ValueError(f"|overlap| must not exceed 1, got {abs(overlap)}")
    norm = 2.0 + c1 * c1
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[1, 1] = rho[2, 2] = 1.0 / norm
    rho[3, 3] = c1 * c1 / norm
    coh = -1j * cmath.exp(1j * delta_phi) * overlap / norm
    rho[1, 2] = coh
    rho[2, 1] = coh.conjugate()
    return rho


def target_state(delta_phi: float) -> np.ndarray:
    psi = np.zeros(4, dtype=np.complex128)
    psi[2] = 1.0
    psi[1] = -1j * cmath.exp(1j * delta_phi)
    return psi / math.sqrt(2.0)


def fidelity_from_rho(rho: np.ndarray, delta_phi: float, tol: float = 1e-8) -> float:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ValueError("rho must be 4x4")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("rho is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"rho has trace {np.trace(rho).real:.12g}, expected 1")
    psi = target_state(delta_phi)
    return float(np.real(np.conj(psi) @ rho @ psi))


@dataclass(frozen=True)
class ProtocolReport:
    c1: float
    fidelity: float
    p_succ: float
    rate_khz: float
    balance_residual: float
    rho: np.ndarray

    def to_dict(self) -> dict:
        return {
            "c1": self.c1,
            "fidelity": self.fidelity,
            "p_succ": self.p_succ,
            "rate_khz": self.rate_khz,
            "balance_residual": self.balance_residual,
            "rho": {"re": self.rho.real.tolist(), "im": self.rho.imag.tolist()},
        }


def evaluate(p: ProtocolParams, overlap: complex, epsilon: float = 0.0) -> ProtocolReport:
    """All protocol figures of merit for a given photon overlap.

    ``f_dyn`` is folded into the density matrix as ``O -> f_dyn O`` so that its
    fidelity equals the closed form.
    """
    c1 = double_excitation_factor(p)
    ov = complex(overlap) * cmath.exp(1j * epsilon)
    f = fidelity(c1, p.f_dyn, ov.real)
    ps = success_probability(p)
    rho = reduced_density_matrix(p.f_dyn * ov, p.delta_phi, c1)
    return ProtocolReport(
        c1=c1, fidelity=f, p_succ=ps, rate_khz=entanglement_rate(p, ps),
        balance_residual=balance_residual(p.p1_yb, p.p1_in, p.p2_yb, p.p2_in), rho=rho,
    )
