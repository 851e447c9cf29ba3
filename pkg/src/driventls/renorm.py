"""Bath renormalization of the dressed frame.

The slow Fourier components of the system Hamiltonian must cancel the
bath-induced dispersive components; that requirement couples the
dressed detuning/drive pair back to the bare pair through the
dispersive transform evaluated at frame-dependent frequencies, giving
a 2x2 nonlinear system solved here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, PolaronDivergence, UndrivenDegenerate
from .frames import DressedFrame, dispersive_coeffs, dressed_frame

FP_ITERATIONS = 60
NEWTON_ITERATIONS = 140
DAMPING = 0.5
JACOBIAN_STEP = 1e-6


@dataclass(frozen=True)
class RenormSolution:
    frame: DressedFrame
    residual_norm: float
    iterations: int
    consistency_gap: float


def approx_renorm(bare, bath):
    """Leading-order closed forms: detuning divided by (1 + slope),
    drive divided by (1 - slope), slope = transform derivative at 0."""
    slope = bath.hilbert_slope0()
    if abs(1.0 + slope) < 1e-6:
        raise PolaronDivergence(
            "detuning rescaling 1/(1 + slope) diverges; coupling is outside "
            "the dispersive regime")
    return bare.detuning / (1.0 + slope), bare.rabi / (1.0 - slope)


def _residual(eta, omega, bare, theta, bath):
    """Difference between the bare pair implied by a candidate dressed
    pair and the actual bare pair."""
    frame = dressed_frame(eta, omega)
    disp = dispersive_coeffs(theta, frame, bare, bath)
    cp, sp = np.cos(frame.angle), np.sin(frame.angle)
    shifted = frame.rabi_prime - disp.a0
    r1 = shifted * cp + disp.a_rabi * sp - bare.detuning
    r2 = shifted * sp - disp.a_rabi * cp - bare.rabi
    return np.array([r1, r2]), disp


def _solve_from_seed(seed, bare, theta, bath, tol):
    eta, omega = seed
    history = []
    iterations = 0
    for _ in range(FP_ITERATIONS):
        res, disp = _residual(eta, omega, bare, theta, bath)
        norm = float(np.hypot(*res))
        history.append(norm)
        if norm <= tol:
            return eta, omega, norm, iterations
        # stall detection: no 2% progress over the last ten steps
        if len(history) > 10 and history[-1] > 0.98 * history[-11]:
            break
        # invert the consistency relation with the dispersive scalars
        # frozen at the current iterate
        s = np.clip(disp.a_rabi / bare.rabi_prime, -1.0, 1.0)
        angle_new = bare.angle + np.arcsin(s)
        op_new = disp.a0 + bare.rabi_prime * np.sqrt(1.0 - s * s)
        eta = (1.0 - DAMPING) * eta + DAMPING * op_new * np.cos(angle_new)
        omega = (1.0 - DAMPING) * omega + DAMPING * op_new * np.sin(angle_new)
        iterations += 1
    # quasi-Newton polish with finite-difference Jacobian
    h = JACOBIAN_STEP
    for _ in range(NEWTON_ITERATIONS):
        res, _ = _residual(eta, omega, bare, theta, bath)
        norm = float(np.hypot(*res))
        if norm <= tol:
            return eta, omega, norm, iterations
        re_p, _ = _residual(eta + h, omega, bare, theta, bath)
        ro_p, _ = _residual(eta, omega + h, bare, theta, bath)
        jac = np.column_stack([(re_p - res) / h, (ro_p - res) / h])
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            break
        # keep steps bounded; far seeds can produce wild first Jacobians
        limit = 0.5 * max(1.0, bare.rabi_prime)
        size = float(np.hypot(*step))
        if size > limit:
            step *= limit / size
        eta -= step[0]
        omega -= step[1]
        iterations += 1
    res, _ = _residual(eta, omega, bare, theta, bath)
    return eta, omega, float(np.hypot(*res)), iterations


def solve_self_consistent(bare, theta, bath, tol=1e-10, seed=None):
    """Solve the frame self-consistency system for the dressed pair.

    The optional seed warm-starts the iteration (parameter
    continuation along a sweep).  Candidate solutions whose drive
    component has the opposite sign to the bare one are rejected as
    spurious branches.
    """
    if bath.spectral_density(-1.0) == 0.0 and bath.hilbert_slope0() == 0.0 \
            and bath.hilbert_transform(0.0) == 0.0:
        frame = dressed_frame(bare.detuning, bare.rabi)
        return RenormSolution(frame=frame, residual_norm=0.0, iterations=0,
                              consistency_gap=0.0)
    if bare.rabi == 0.0:
        raise UndrivenDegenerate(
            "bare drive matrix element is zero with bath coupling on; the "
            "dressed angle is ill-conditioned, renormalization not defined")

    seeds = []
    if seed is not None:
        seeds.append(tuple(seed))
    eta_ap, omega_ap = approx_renorm(bare, bath)
    seeds.append((bare.detuning, omega_ap))
    seeds.append((eta_ap, omega_ap))
    seeds.append((bare.detuning, bare.rabi))

    total_iterations = 0
    best = None
    for s in seeds:
        eta, omega, norm, used = _solve_from_seed(s, bare, theta, bath, tol)
        total_iterations += used
        if norm <= tol and omega * bare.rabi > 0.0:
            frame = dressed_frame(eta, omega)
            disp = dispersive_coeffs(theta, frame, bare, bath)
            gap = max(
                np.max(np.abs(disp.h0 - disp.f0)),
                np.max(np.abs(disp.h_plus - disp.f_plus)),
                np.max(np.abs(disp.h_minus - disp.f_minus)),
            )
            return RenormSolution(frame=frame, residual_norm=norm,
                                  iterations=total_iterations,
                                  consistency_gap=float(gap))
        if best is None or norm < best:
            best = norm
    raise NoConvergence(
        f"self-consistency iteration did not reach tol={tol:g} from any "
        f"seed (best residual {best:.3g}); retry with another seed or a "
        "smaller bath coupling")
