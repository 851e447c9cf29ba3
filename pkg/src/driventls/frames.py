"""Frames and Fourier tables for the periodically driven double dot.

The chain of bases: lab (left/right dot) -> static eigenbasis (rotation
by theta about y) -> frame co-rotating with the drive (RWA keeps the
slow terms) -> dressed basis (rotation by the dressed angle phi) ->
interaction picture of the dressing Hamiltonian.  Under that chain the
dot-position operator sigma_z acquires nine Fourier components whose
frequencies are 0, +-Omega', +-1, +-(1 + Omega'), +-(1 - Omega') in
units of the drive frequency.

All matrices are in the dressed basis ordered (ground, excited), with
the ground state at sigma_z = +1 under the dressing Hamiltonian
-Omega' sigma_z / 2.  The energy-raising ladder operator is therefore
the lower-left matrix unit; it carries the phase e^{+i Omega' t} in the
interaction picture.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrequencies

SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
RAISING = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
LOWERING = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# pairwise frequency collisions below this are refused
DEGENERACY_TOL = 1e-9


def _frozen(mat):
    out = np.asarray(mat, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DQDParams:
    """Static and drive parameters of the double dot, in drive-frequency
    units: bias and tunneling set the static Hamiltonian
    -(bias sigma_z + tunneling sigma_x)/2; the drive modulates the bias
    with amplitude drive_amplitude and phase offset drive_angle."""

    bias: float
    tunneling: float
    drive_angle: float
    drive_amplitude: float

    def __post_init__(self):
        if not self.tunneling > 0.0:
            raise ValueError("tunneling must be positive")
        if self.drive_amplitude < 0.0:
            raise ValueError("drive_amplitude must be nonnegative")


@dataclass(frozen=True)
class BareFrame:
    """Rotating-frame quantities before bath renormalization."""

    theta: float        # mixing angle of the static eigenbasis
    splitting: float    # static level splitting
    detuning: float     # splitting minus the drive frequency
    rabi: float         # signed drive matrix element
    rabi_prime: float   # generalized flopping frequency
    angle: float        # polar angle of (detuning, rabi)


@dataclass(frozen=True)
class DressedFrame:
    """Detuning/drive pair actually entering the dressed basis; equal to
    the bare pair only for vanishing bath coupling."""

    detuning: float
    rabi: float
    rabi_prime: float
    angle: float


def bare_frame(params):
    theta = np.arctan2(params.tunneling, params.bias)
    splitting = np.hypot(params.bias, params.tunneling)
    detuning = splitting - 1.0
    rabi = params.drive_amplitude * np.sin(theta - params.drive_angle)
    return BareFrame(
        theta=theta,
        splitting=splitting,
        detuning=detuning,
        rabi=rabi,
        rabi_prime=float(np.hypot(detuning, rabi)),
        angle=float(np.arctan2(rabi, detuning)),
    )


def dressed_frame(detuning, rabi):
    return DressedFrame(
        detuning=float(detuning),
        rabi=float(rabi),
        rabi_prime=float(np.hypot(detuning, rabi)),
        angle=float(np.arctan2(rabi, detuning)),
    )


@dataclass(frozen=True)
class TableEntry:
    """One Fourier component: frequency = label[0] + label[1]*Omega'."""

    label: tuple
    frequency: float
    alpha: float
    matrix: np.ndarray


class CouplingTable:
    """Fourier table of a dressed-basis operator, indexed by integer
    labels (m, n) meaning frequency m + n*Omega'."""

    def __init__(self, entries, rabi_prime):
        self.entries = tuple(entries)
        self.rabi_prime = float(rabi_prime)
        self._by_label = {e.label: e for e in self.entries}

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def labels(self):
        return tuple(e.label for e in self.entries)

    def entry(self, label):
        return self._by_label[label]

    def matrix(self, label):
        return self._by_label[label].matrix

    def frequency(self, label):
        return self._by_label[label].frequency

    def at_time(self, t):
        """Sum of all components with their interaction-picture phases."""
        total = np.zeros((2, 2), dtype=complex)
        for e in self.entries:
            total += e.matrix * np.exp(1j * e.frequency * t)
        return total


def _check_nondegenerate(labels, freqs):
    n = len(freqs)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(freqs[i] - freqs[j]) < DEGENERACY_TOL:
                raise DegenerateFrequencies(
                    f"frequency labels {labels[i]} and {labels[j]} coincide "
                    f"at {freqs[i]:.9g}; the Fourier table cannot separate "
                    "them (dressed splitting too close to 0, 1/2, or 1)")


def coupling_table(theta, frame):
    """Nine-component Fourier table of the dot-position operator in the
    dressed interaction picture."""
    op = frame.rabi_prime
    phi = frame.angle
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)

    alpha_0 = ct * cp
    alpha_r = -ct * sp              # at +-Omega'
    alpha_1 = -st * sp / 2.0        # at +-1
    alpha_up = -st * (1.0 + cp) / 2.0   # at +-(1 + Omega')
    alpha_dn = +st * (1.0 - cp) / 2.0   # at +-(1 - Omega')

    spec = [
        ((0, 0), alpha_0, SIGMA_Z),
        ((0, 1), alpha_r, RAISING),
        ((0, -1), alpha_r, LOWERING),
        ((1, 0), alpha_1, SIGMA_Z),
        ((-1, 0), alpha_1, SIGMA_Z),
        ((1, 1), alpha_up, RAISING),
        ((-1, -1), alpha_up, LOWERING),
        ((1, -1), alpha_dn, LOWERING),
        ((-1, 1), alpha_dn, RAISING),
    ]
    labels = [lab for lab, _, _ in spec]
    freqs = [m + n * op for (m, n) in labels]
    _check_nondegenerate(labels, freqs)
    entries = [
        TableEntry(label=lab, frequency=m + n * op, alpha=float(a),
                   matrix=_frozen(a * base))
        for (lab, a, base), (m, n) in zip(spec, labels)
    ]
    return CouplingTable(entries, op)


def observable_table(theta, frame):
    """Fourier table of the right-dot projector (1 - sigma_z^lab)/2,
    obtained from the position table by the same linear map."""
    base = coupling_table(theta, frame)
    entries = []
    for e in base:
        if e.label == (0, 0):
            mat = (IDENTITY - e.matrix) / 2.0
        else:
            mat = -e.matrix / 2.0
        entries.append(TableEntry(label=e.label, frequency=e.frequency,
                                  alpha=-e.alpha / 2.0, matrix=_frozen(mat)))
    return CouplingTable(entries, base.rabi_prime)


@dataclass(frozen=True)
class DispersiveCoeffs:
    """Scalar dispersive shifts and the 2x2 slow Fourier components of
    the system Hamiltonian and its bath-induced counterpart."""

    a0: float
    a_rabi: float
    f0: np.ndarray
    f_plus: np.ndarray
    f_minus: np.ndarray
    h0: np.ndarray
    h_plus: np.ndarray
    h_minus: np.ndarray


def dispersive_coeffs(theta, frame, bare, bath):
    """Evaluate the bath-induced dispersive coefficients and the slow
    Hamiltonian components for the given frame pair."""
    table = coupling_table(theta, frame)
    op = frame.rabi_prime
    phi = frame.angle

    def f_odd(x):
        # antisymmetrized dispersive transform
        return bath.hilbert_transform(x) - bath.hilbert_transform(-x)

    fr = f_odd(op)
    fup = f_odd(1.0 + op)
    fdn = f_odd(1.0 - op)

    alpha_0 = table.entry((0, 0)).alpha
    alpha_r = table.entry((0, 1)).alpha
    alpha_1 = table.entry((1, 0)).alpha
    alpha_up = table.entry((1, 1)).alpha
    alpha_dn = table.entry((1, -1)).alpha

    a0 = 0.5 * (-alpha_dn ** 2 * fdn + alpha_up ** 2 * fup
                + alpha_r ** 2 * fr)
    a_rabi = alpha_1 * (alpha_dn * fdn - alpha_up * fup) - alpha_0 * alpha_r * fr

    gap = bare.angle - phi
    h0_coeff = -(bare.rabi_prime * np.cos(gap) - op)
    h_rabi = -bare.rabi_prime * np.sin(gap)

    return DispersiveCoeffs(
        a0=float(a0),
        a_rabi=float(a_rabi),
        f0=_frozen(a0 * SIGMA_Z / 2.0),
        f_plus=_frozen(a_rabi * RAISING / 2.0),
        f_minus=_frozen(a_rabi * LOWERING / 2.0),
        h0=_frozen(h0_coeff * SIGMA_Z / 2.0),
        h_plus=_frozen(h_rabi * RAISING / 2.0),
        h_minus=_frozen(h_rabi * LOWERING / 2.0),
    )
