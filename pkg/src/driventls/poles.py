"""Residue equations of the periodic steady state.

The steady density matrix is represented by simple poles at the slow
frequencies 0 and +-Omega'.  Requiring pole-by-pole consistency of the
transformed equation of motion couples the three residues through the
one-sided bath response evaluated at all table frequencies shifted by
the pole positions; that 12x12 linear system is assembled and its
one-dimensional kernel extracted here, together with the conventional
Markovian baseline for comparison.
"""

from dataclasses import dataclass
import warnings

import numpy as np

from .errors import IllConditionedWarning, SingularSystem
from .frames import IDENTITY

# pole labels: (m, n) meaning frequency m + n*Omega'
V_LABELS = ((0, 0), (0, 1), (0, -1))

KERNEL_CUTOFF = 1e-10
CONDITION_LIMIT = 1e12
TRACE_IDENTITY_TOL = 1e-12

# row-major vec: index 0 = (0,0), 3 = (1,1)
_TRACE_ROW = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)


def _left_mult(a):
    return np.kron(a, IDENTITY)


def _right_mult(a):
    return np.kron(IDENTITY, a.T)


def _sandwich(a, b):
    # vec(a rho b^dagger) = (a kron conj(b)) vec(rho)
    return np.kron(a, b.conj())


@dataclass(frozen=True)
class ResidueSystem:
    matrix: np.ndarray          # 12x12, acts on stacked residue vectors
    kernel_dimension: int
    conditioning: float
    labels: tuple               # pole labels in block order
    frequencies: tuple          # pole frequencies in block order
    trace_defect: float         # worst trace-functional leakage at assembly


@dataclass(frozen=True)
class ResidueSet:
    poles: tuple                # frequencies
    labels: tuple
    residues: dict              # frequency -> 2x2 matrix

    def rho(self, frequency):
        return self.residues[frequency]


def _commutator_block(mat):
    return _left_mult(mat) - _right_mult(mat)


def assemble_system(table, disp, frame, bath, use_hamiltonian_components=False):
    """Build the linear operator whose kernel holds the pole residues.

    With use_hamiltonian_components the commutator term carries the
    actual slow Hamiltonian components instead of the bath-induced
    dispersive ones; the two coincide when the frame is renormalized.
    """
    op = frame.rabi_prime
    label_set = set(table.labels())
    if use_hamiltonian_components:
        slow = {(0, 0): disp.h0, (0, 1): disp.h_plus, (0, -1): disp.h_minus}
    else:
        slow = {(0, 0): disp.f0, (0, 1): disp.f_plus, (0, -1): disp.f_minus}

    blocks = [[np.zeros((4, 4), dtype=complex) for _ in V_LABELS]
              for _ in V_LABELS]

    # assemble row by row: row i is the equation for pole nu' = V[i]
    for i, vp in enumerate(V_LABELS):
        for j, v in enumerate(V_LABELS):
            acc = np.zeros((4, 4), dtype=complex)
            # slow commutator: component at nu' - nu
            diff = (vp[0] - v[0], vp[1] - v[1])
            if diff in slow:
                acc += -1j * _commutator_block(slow[diff])
            # bath terms: omega' = omega + nu - nu'
            for e in table:
                wl = e.label
                wpl = (wl[0] + v[0] - vp[0], wl[1] + v[1] - vp[1])
                if wpl not in label_set:
                    continue
                p = e.matrix
                pp = table.matrix(wpl)
                ppdp = pp.conj().T @ p
                jp = bath.one_sided_response(
                    e.frequency - (vp[0] + vp[1] * op), +1)
                jm = bath.one_sided_response(
                    e.frequency + (v[0] + v[1] * op), -1)
                acc += (jp + jm) * _sandwich(p, pp)
                acc += -jp * _right_mult(ppdp)
                acc += -jm * _left_mult(ppdp)
            blocks[i][j] = acc

    # trace functional must annihilate every assembled block row: the
    # trace of each bath term cancels cyclically and the commutator is
    # traceless, which is what makes the zero-trace of the oscillating
    # residues emergent rather than imposed
    defect = 0.0
    for i in range(len(V_LABELS)):
        for j in range(len(V_LABELS)):
            leak = np.max(np.abs(_TRACE_ROW @ blocks[i][j]))
            defect = max(defect, float(leak))
    if defect > TRACE_IDENTITY_TOL:
        raise AssertionError(
            f"trace functional leaks {defect:.3e} through the assembled "
            "operator; assembly is inconsistent")

    # move the pole term to the left: subtract i*nu' on the diagonal
    for i, vp in enumerate(V_LABELS):
        nu = vp[0] + vp[1] * op
        blocks[i][i] = blocks[i][i] - 1j * nu * np.eye(4, dtype=complex)

    matrix = np.block(blocks)
    sv = np.linalg.svd(matrix, compute_uv=False)
    smax = sv[0]
    kernel_dim = int(np.sum(sv < KERNEL_CUTOFF * smax)) if smax > 0 else 12
    if kernel_dim >= sv.size:
        conditioning = np.inf
    else:
        conditioning = float(smax / sv[sv.size - kernel_dim - 1])
    freqs = tuple(m + n * op for (m, n) in V_LABELS)
    return ResidueSystem(matrix=matrix, kernel_dimension=kernel_dim,
                         conditioning=conditioning, labels=V_LABELS,
                         frequencies=freqs, trace_defect=defect)


def _exact_unit_trace(rho):
    """Adjust the last diagonal entry so the trace sums to exactly 1
    (the shift is at the solver's own noise level)."""
    out = rho.copy()
    out[1, 1] = (1.0 - out[0, 0].real) - 1j * out[0, 0].imag
    return out


def solve_residues(system):
    """Extract the physical kernel vector, normalized to unit trace."""
    if system.kernel_dimension != 1:
        raise SingularSystem(
            f"residue system kernel has dimension {system.kernel_dimension}"
            ", expected 1; the steady state is not unique at this point")
    if system.conditioning > CONDITION_LIMIT:
        warnings.warn(
            f"residue system conditioning {system.conditioning:.3e} exceeds "
            f"{CONDITION_LIMIT:.0e}; results may lose digits",
            IllConditionedWarning)
    n = system.matrix.shape[0]
    trace_row = np.zeros(n, dtype=complex)
    trace_row[0] = 1.0
    trace_row[3] = 1.0
    aug = np.vstack([system.matrix, trace_row])
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[n] = 1.0
    x, *_ = np.linalg.lstsq(aug, rhs, rcond=None)
    residues = {}
    mats = [x[4 * k:4 * k + 4].reshape(2, 2) for k in range(len(system.labels))]
    mats[0] = _exact_unit_trace(mats[0])
    for freq, mat in zip(system.frequencies, mats):
        residues[freq] = mat
    return ResidueSet(poles=system.frequencies, labels=system.labels,
                      residues=residues)


def system_residual(system, resset):
    """Relative residual of a residue set against the assembled system."""
    x = np.concatenate([resset.residues[f].ravel()
                        for f in system.frequencies])
    return float(np.linalg.norm(system.matrix @ x)
                 / max(np.linalg.norm(x), 1e-300))


def markov_steady(table, bath):
    """Steady state of the frequency-resolved Lindblad baseline: one
    dissipator per table frequency, weighted by the spectral density."""
    lind = np.zeros((4, 4), dtype=complex)
    active = 0
    for e in table:
        j = float(bath.spectral_density(e.frequency))
        if j == 0.0:
            continue
        active += 1
        p = e.matrix
        pdp = p.conj().T @ p
        lind += j * (_sandwich(p, p)
                     - 0.5 * _right_mult(pdp) - 0.5 * _left_mult(pdp))
    if active == 0:
        raise SingularSystem(
            "no table frequency carries spectral weight; the Markovian "
            "steady state is not unique")
    sv = np.linalg.svd(lind, compute_uv=False)
    kernel_dim = int(np.sum(sv < KERNEL_CUTOFF * sv[0])) if sv[0] > 0 else 4
    if kernel_dim != 1:
        raise SingularSystem(
            f"Markovian generator kernel has dimension {kernel_dim}, "
            "expected 1")
    aug = np.vstack([lind, _TRACE_ROW])
    rhs = np.zeros(5, dtype=complex)
    rhs[4] = 1.0
    x, *_ = np.linalg.lstsq(aug, rhs, rcond=None)
    rho = _exact_unit_trace(x.reshape(2, 2))
    return ResidueSet(poles=(0.0,), labels=((0, 0),),
                      residues={0.0: rho})


def steady_observable(resset, obs):
    """Contract the residues with the observable table components at the
    matching pole frequencies."""
    total = 0.0 + 0.0j
    for label, freq in zip(resset.labels, resset.poles):
        m = obs.matrix(label)
        total += np.trace(m.conj().T @ resset.residues[freq])
    return float(total.real)
