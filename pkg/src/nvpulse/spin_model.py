"""NV ground-state spin system: Hamiltonian, eigensolve, transition lines.

The Hamiltonian (in Hz, i.e. H/h) for the electron spin S = 1 coupled to
the host nitrogen nucleus (I = 1) and any number of carbon-13 nuclei
(I = 1/2):

    H = D Sz^2 - g_e B.S - g_N B.I_N - g_C sum_i B.I_Ci
        + A_par Sz Iz_N + A_perp (Sx Ix_N + Sy Iy_N)
        + Sz sum_i A_i . I_Ci

built from Kronecker products of the standard spin-1 and spin-1/2
operator matrices, electron factor first.  The microwave-addressable
lines are the m_s = 0 -> m_s = -1 transitions; the m_s = +1 manifold is
kept in the matrix but never paired, since the drive carrier is GHz
detuned from it.

Gyromagnetic ratios and the nitrogen hyperfine constants are configurable
with literature defaults; they are not asserted as ground truth anywhere.
All functions are pure and the value types are immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateFieldError, InvalidInputError, NumericalFailureError

DEFAULT_ZERO_FIELD_SPLITTING = 2.870e9  # Hz
DEFAULT_GAMMA_E = -28.024e9  # Hz/T
DEFAULT_GAMMA_N14 = 3.077e6  # Hz/T
DEFAULT_GAMMA_C13 = 10.705e6  # Hz/T
DEFAULT_A_PAR_N = 2.16e6  # Hz
DEFAULT_A_PERP_N = 2.7e6  # Hz

MERGE_TOLERANCE_HZ = 1.0


@dataclass(frozen=True)
class NVParameters:
    """Physical constants of the spin system (all literature defaults)."""

    zero_field_splitting: float = DEFAULT_ZERO_FIELD_SPLITTING
    gamma_e: float = DEFAULT_GAMMA_E
    gamma_n14: float = DEFAULT_GAMMA_N14
    gamma_c13: float = DEFAULT_GAMMA_C13
    a_par_n: float = DEFAULT_A_PAR_N
    a_perp_n: float = DEFAULT_A_PERP_N
    c13_couplings: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        couplings = tuple(tuple(float(c) for c in vec) for vec in self.c13_couplings)
        object.__setattr__(self, "c13_couplings", couplings)
        scalars = [
            self.zero_field_splitting,
            self.gamma_e,
            self.gamma_n14,
            self.gamma_c13,
            self.a_par_n,
            self.a_perp_n,
        ]
        if not all(math.isfinite(v) for v in scalars):
            raise InvalidInputError("spin parameters must be finite")
        if self.zero_field_splitting < 0:
            raise InvalidInputError("zero-field splitting must be non-negative")
        for vec in couplings:
            if len(vec) != 3:
                raise InvalidInputError("each c13 coupling needs 3 components")
            if not all(math.isfinite(c) for c in vec):
                raise InvalidInputError("c13 couplings must be finite")

    @property
    def n_c13(self) -> int:
        return len(self.c13_couplings)


@dataclass(frozen=True)
class MagneticField:
    """Static field in the NV frame (T), z along the NV axis."""

    b_vector: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        vec = tuple(float(c) for c in self.b_vector)
        if len(vec) != 3 or not all(math.isfinite(c) for c in vec):
            raise InvalidInputError("field must have 3 finite components")
        object.__setattr__(self, "b_vector", vec)


@dataclass(frozen=True)
class HamiltonianMatrix:
    dimension: int
    entries: np.ndarray

    def __post_init__(self):
        h = np.ascontiguousarray(self.entries, dtype=complex)
        if h.shape != (self.dimension, self.dimension):
            raise InvalidInputError(f"entries shape {h.shape} != dimension {self.dimension}")
        scale = max(float(np.max(np.abs(h))), 1.0)
        herm = float(np.max(np.abs(h - h.conj().T)))
        if herm > 1e-6 * scale:
            raise InvalidInputError(f"matrix is not Hermitian (deviation {herm:.3e})")
        h.flags.writeable = False
        object.__setattr__(self, "entries", h)


@dataclass(frozen=True)
class TransitionLine:
    frequency: float
    weight: float
    label: str

    def __post_init__(self):
        if not (self.frequency > 0) or not math.isfinite(self.frequency):
            raise InvalidInputError(f"transition frequency must be positive, got {self.frequency}")
        if not (0 < self.weight <= 1):
            raise InvalidInputError(f"line weight must be in (0, 1], got {self.weight}")


@dataclass(frozen=True)
class LineSet:
    lines: tuple[TransitionLine, ...]

    def __post_init__(self):
        lines = tuple(self.lines)
        if not lines:
            raise InvalidInputError("line set is empty")
        freqs = [ln.frequency for ln in lines]
        if any(b - a <= MERGE_TOLERANCE_HZ for a, b in zip(freqs, freqs[1:])):
            raise InvalidInputError("line frequencies must be ascending, distinct beyond 1 Hz")
        total = sum(ln.weight for ln in lines)
        if abs(total - 1.0) > 1e-12:
            raise InvalidInputError(f"line weights must sum to 1, got {total}")
        object.__setattr__(self, "lines", lines)

    def frequencies(self) -> np.ndarray:
        return np.array([ln.frequency for ln in self.lines])

    def weights(self) -> np.ndarray:
        return np.array([ln.weight for ln in self.lines])

    def labels(self) -> list[str]:
        return [ln.label for ln in self.lines]

    def __len__(self) -> int:
        return len(self.lines)


# --- operator construction ---------------------------------------------------

_SQRT2 = math.sqrt(2.0)

SPIN1_X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _SQRT2
SPIN1_Y = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _SQRT2
SPIN1_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)

SPIN_HALF_X = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SPIN_HALF_Y = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SPIN_HALF_Z = np.diag([0.5, -0.5]).astype(complex)


def _embed(op: np.ndarray, slot: int, dims: list[int]) -> np.ndarray:
    """Kronecker-embed `op` at position `slot` of the factor list."""
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        out = np.kron(out, op if i == slot else np.eye(d, dtype=complex))
    return out


def build_hamiltonian(params: NVParameters, fld: MagneticField) -> HamiltonianMatrix:
    """Assemble the full ground-state Hamiltonian (Hz units)."""
    n_c = params.n_c13
    dims = [3, 3] + [2] * n_c
    dim = 9 * 2**n_c

    sx, sy, sz = (_embed(op, 0, dims) for op in (SPIN1_X, SPIN1_Y, SPIN1_Z))
    inx, iny, inz = (_embed(op, 1, dims) for op in (SPIN1_X, SPIN1_Y, SPIN1_Z))

    bx, by, bz = fld.b_vector
    h = params.zero_field_splitting * (sz @ sz)
    h -= params.gamma_e * (bx * sx + by * sy + bz * sz)
    h -= params.gamma_n14 * (bx * inx + by * iny + bz * inz)
    h += params.a_par_n * (sz @ inz)
    h += params.a_perp_n * (sx @ inx + sy @ iny)

    for i, (ax, ay, az) in enumerate(params.c13_couplings):
        icx, icy, icz = (_embed(op, 2 + i, dims) for op in (SPIN_HALF_X, SPIN_HALF_Y, SPIN_HALF_Z))
        h -= params.gamma_c13 * (bx * icx + by * icy + bz * icz)
        h += sz @ (ax * icx + ay * icy + az * icz)

    return HamiltonianMatrix(dimension=dim, entries=h)


# --- eigensolver -------------------------------------------------------------


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-9, max_sweeps: int = 60):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below tol times the
    matrix Frobenius norm.  Returns (eigenvalues ascending, eigenvector
    columns).  Intended for the small matrices built here (dim <= ~20).
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.zeros(n), v

    def offdiag() -> float:
        off = a - np.diag(np.diag(a))
        return float(np.linalg.norm(off))

    for _ in range(max_sweeps):
        if offdiag() <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                if abs(g) < 1e-300:
                    continue
                phase = g / abs(g)
                alpha = a[p, p].real
                beta = a[q, q].real
                tau = (beta - alpha) / (2 * abs(g))
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1.0 / math.sqrt(1 + t * t)
                s = t * c
                # columns: [p, q] <- [c*p - conj(sp)*q, sp*p + c*q] with sp = s*phase
                sp = s * phase
                col_p = a[:, p] * c - a[:, q] * np.conj(sp)
                col_q = a[:, p] * sp + a[:, q] * c
                a[:, p], a[:, q] = col_p, col_q
                row_p = a[p, :] * c - a[q, :] * sp
                row_q = a[p, :] * np.conj(sp) + a[q, :] * c
                a[p, :], a[q, :] = row_p, row_q
                vc_p = v[:, p] * c - v[:, q] * np.conj(sp)
                vc_q = v[:, p] * sp + v[:, q] * c
                v[:, p], v[:, q] = vc_p, vc_q
    else:
        raise NumericalFailureError(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps"
        )

    evals = np.diag(a).real.copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


# --- transition extraction ---------------------------------------------------

_N14_TAGS = {0: "N:+1", 1: "N:0", 2: "N:-1"}
_C13_TAGS = {0: "+1/2", 1: "-1/2"}


def _nuclear_label(index: int, n_c13: int) -> str:
    """Decode a nuclear basis index into an m_I tag string."""
    parts = []
    for i in range(n_c13, 0, -1):
        parts.append(f"C{i}:{_C13_TAGS[index % 2]}")
        index //= 2
    parts.append(_N14_TAGS[index])
    return ";".join(reversed(parts))


def transition_lines(h: HamiltonianMatrix, params: NVParameters) -> LineSet:
    """Microwave-addressable m_s = 0 -> m_s = -1 lines of a Hamiltonian.

    Eigenvectors are classified by their dominant electron projection;
    classification is ambiguous (no projection weight above 0.6) only in
    field regimes outside this model's scope, which raises
    DegenerateFieldError.  Level pairs whose nuclear parts overlap with
    probability above 0.5 become lines with equal weights; lines closer
    than 1 Hz are merged.
    """
    evals, evecs = jacobi_eigh(h.entries)
    dim = h.dimension
    d_nuc = dim // 3

    manifold: dict[int, list[tuple[float, np.ndarray]]] = {0: [], 1: [], 2: []}
    for idx in range(dim):
        vec = evecs[:, idx].reshape(3, d_nuc)
        weights = np.sum(np.abs(vec) ** 2, axis=1)
        ms_index = int(np.argmax(weights))
        if weights[ms_index] <= 0.6:
            raise DegenerateFieldError(
                "eigenvector has no dominant electron-spin projection; "
                f"weights {np.round(weights, 3)}"
            )
        nuclear = vec[ms_index]
        manifold[ms_index].append((float(evals[idx]), nuclear / np.linalg.norm(nuclear)))

    raw: list[tuple[float, str]] = []
    for e0, n0 in manifold[1]:  # m_s = 0
        for e1, n1 in manifold[2]:  # m_s = -1
            overlap = abs(np.vdot(n0, n1)) ** 2
            if overlap > 0.5:
                label = _nuclear_label(int(np.argmax(np.abs(n0))), params.n_c13)
                raw.append((e1 - e0, label))
    if not raw:
        raise DegenerateFieldError("no m_s=0 -> m_s=-1 pairs with matching nuclear state")

    raw.sort(key=lambda item: item[0])
    weight = 1.0 / len(raw)

    # greedy 1 Hz merge of (near-)degenerate lines, weights accumulated
    merged: list[tuple[float, float, str]] = []  # (weighted freq sum, weight sum, label)
    for freq, label in raw:
        if merged:
            last_freq = merged[-1][0] / merged[-1][1]
            if freq - last_freq <= MERGE_TOLERANCE_HZ:
                wsum_freq, wsum, lbl = merged[-1]
                merged[-1] = (wsum_freq + freq * weight, wsum + weight, f"{lbl}+{label}")
                continue
        merged.append((freq * weight, weight, label))

    lines = tuple(
        TransitionLine(frequency=wf / w, weight=w, label=lbl) for wf, w, lbl in merged
    )
    return LineSet(lines=lines)


def detuned_lines(lines: LineSet, carrier: float) -> list[tuple[float, float, str]]:
    """(detuning_hz, weight, label) per line relative to a drive carrier (Hz)."""
    if not (carrier > 0):
        raise InvalidInputError(f"carrier must be positive, got {carrier}")
    return [(ln.frequency - carrier, ln.weight, ln.label) for ln in lines.lines]


# --- config ------------------------------------------------------------------


def lineset_from_frequencies(frequencies, labels=None) -> LineSet:
    """Equal-weight LineSet from explicit frequencies (ascending order enforced)."""
    freqs = sorted(float(f) for f in frequencies)
    if labels is None:
        labels = [f"L{i}" for i in range(len(freqs))]
    weight = 1.0 / len(freqs)
    return LineSet(
        lines=tuple(
            TransitionLine(frequency=f, weight=weight, label=lbl)
            for f, lbl in zip(freqs, labels)
        )
    )


_CONFIG_KEYS = {
    "zero_field_splitting_hz": "zero_field_splitting",
    "gamma_e_hz_per_t": "gamma_e",
    "gamma_n14_hz_per_t": "gamma_n14",
    "gamma_c13_hz_per_t": "gamma_c13",
    "a_par_n_hz": "a_par_n",
    "a_perp_n_hz": "a_perp_n",
}


@dataclass(frozen=True)
class SpinSystemConfig:
    """Resolved spin-system configuration."""

    params: NVParameters
    field: MagneticField
    line_override: tuple[float, ...] | None = None

    def line_set(self) -> LineSet:
        if self.line_override is not None:
            return lineset_from_frequencies(self.line_override)
        return transition_lines(build_hamiltonian(self.params, self.field), self.params)


def spin_config_from_dict(raw: dict, source: str = "<inline>") -> SpinSystemConfig:
    if not isinstance(raw, dict):
        raise ConfigError("spin config must be a JSON object", path=source)
    known = set(_CONFIG_KEYS) | {"b_field_t", "c13_couplings_hz", "line_override_hz"}
    for key in raw:
        if key not in known:
            raise ConfigError("unknown spin config key", path=source, field=key)
    kwargs = {}
    for file_key, attr in _CONFIG_KEYS.items():
        if file_key in raw:
            try:
                kwargs[attr] = float(raw[file_key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"expected number: {exc}", path=source, field=file_key) from exc
    couplings = raw.get("c13_couplings_hz", [])
    try:
        kwargs["c13_couplings"] = tuple(tuple(float(c) for c in vec) for vec in couplings)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"c13 couplings must be 3-vectors: {exc}", path=source, field="c13_couplings_hz"
        ) from exc
    b = raw.get("b_field_t", (0.0, 0.0, 0.0))
    try:
        fld = MagneticField(b_vector=tuple(float(c) for c in b))
        params = NVParameters(**kwargs)
    except (TypeError, ValueError, InvalidInputError) as exc:
        raise ConfigError(str(exc), path=source) from exc
    override = raw.get("line_override_hz")
    if override is not None:
        try:
            override = tuple(float(f) for f in override)
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"line override must be numbers: {exc}", path=source, field="line_override_hz"
            ) from exc
        if not override or any(f <= 0 for f in override):
            raise ConfigError(
                "line override must be non-empty positive frequencies",
                path=source,
                field="line_override_hz",
            )
    return SpinSystemConfig(params=params, field=fld, line_override=override)


def load_spin_config(path: str | Path) -> SpinSystemConfig:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"spin config not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"spin config is not valid JSON: {exc}", path=str(p)) from exc
    return spin_config_from_dict(raw, source=str(p))
