"""Dense statevector simulation of layered parameterized circuits.

A circuit on ``m`` qubits is a stack of ``L`` layers.  Each layer applies one
parametrized single-qubit rotation per qubit (generator a Pauli involution,
so the gate is ``exp(-i * G * theta)``), followed by the layer's fixed part:
per-qubit Z-rotations whose angles encode the classical input, then CZ
entanglers on pairwise-disjoint qubit pairs.  Amplitudes are stored as a flat
``complex128`` array of length ``2**m`` with qubit ``k`` mapped to bit ``k``
of the index (little-endian), and gates are applied through strided views.

Internally everything runs on a batch axis (shape ``(B, 2**m)``, one row per
parameter draw) so Monte-Carlo loops and multi-seed flows amortize the
per-gate overhead; the public single-state operations wrap a batch of one.

Qubits are numbered ``0..m-1``; layers ``1..L``; the parameter for qubit
``k`` in layer ``ell`` sits at index ``(ell - 1) * m + k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS_DEFAULT = 20

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

_NORM_TOL = 1e-12


class StructuralError(ValueError):
    """Architecture/state shape mismatch or invalid circuit description."""


def param_index(m: int, ell: int, k: int) -> int:
    """Flat parameter index of (layer ``ell`` in 1..L, qubit ``k`` in 0..m-1)."""
    return (ell - 1) * m + k


def param_layer_qubit(m: int, i: int) -> tuple[int, int]:
    """Inverse of :func:`param_index`: returns ``(ell, k)``."""
    return i // m + 1, i % m


def wrap_parameters(theta: np.ndarray) -> np.ndarray:
    """Reduce angles to the fundamental domain [0, pi) (gates are pi-periodic)."""
    return np.mod(np.asarray(theta, dtype=float), np.pi)


@dataclass(frozen=True)
class LayerSpec:
    """One layer: per-qubit generator axes plus disjoint CZ entangler pairs."""

    generator_axes: tuple[str, ...]
    entangler_pairs: tuple[tuple[int, int], ...] = ()

    def validate(self, m: int) -> None:
        if len(self.generator_axes) != m:
            raise StructuralError(
                f"layer has {len(self.generator_axes)} generator axes, expected {m}"
            )
        for axis in self.generator_axes:
            if axis not in _PAULI:
                raise StructuralError(f"unknown generator axis {axis!r}")
        used: set[int] = set()
        for pair in self.entangler_pairs:
            a, b = pair
            if not (0 <= a < m and 0 <= b < m) or a == b:
                raise StructuralError(f"entangler pair {pair} out of range for m={m}")
            if a in used or b in used:
                raise StructuralError(f"entangler pairs not disjoint at {pair}")
            used.update(pair)


@dataclass
class ArchitectureSpec:
    """Static description of a layered circuit.

    ``observable_axes`` gives the measured single-qubit Pauli per qubit
    (traceless, spectrum in [-1, 1] by construction).  The input encoding
    draws fixed weights ``w[ell-1, k]`` once from ``encoding_seed``; layer
    ``ell`` applies a Z-rotation by ``<w[ell-1, k], x>`` on each qubit.
    """

    m: int
    L: int
    layers: tuple[LayerSpec, ...]
    observable_axes: tuple[str, ...] = ()
    encoding_seed: int = 0
    input_dim: int = 1
    max_qubits: int = MAX_QUBITS_DEFAULT
    encoding_weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.observable_axes:
            self.observable_axes = ("z",) * self.m
        if self.m < 1:
            raise StructuralError("need at least one qubit")
        if self.m > self.max_qubits:
            raise StructuralError(
                f"m={self.m} exceeds the desk-scale cap of {self.max_qubits} qubits"
            )
        if self.L < 1:
            raise StructuralError("need at least one layer (L >= 1)")
        if len(self.layers) != self.L:
            raise StructuralError(f"{len(self.layers)} layer specs for L={self.L}")
        if self.input_dim < 1:
            raise StructuralError("input_dim must be positive")
        for layer in self.layers:
            layer.validate(self.m)
        if len(self.observable_axes) != self.m:
            raise StructuralError("need one observable per qubit")
        for axis in self.observable_axes:
            mat = observable_matrix(axis)
            eigs = np.linalg.eigvalsh(mat)
            if abs(np.trace(mat)) > 1e-12 or eigs.min() < -1 - 1e-12 or eigs.max() > 1 + 1e-12:
                raise StructuralError(f"observable {axis!r} violates trace/spectrum assumptions")
        rng = np.random.default_rng(self.encoding_seed)
        self.encoding_weights = rng.standard_normal((self.L, self.m, self.input_dim))

    @property
    def n_params(self) -> int:
        return self.L * self.m

    def to_json(self) -> str:
        doc = {
            "m": self.m,
            "L": self.L,
            "layers": [
                {
                    "generator_axes": list(layer.generator_axes),
                    "entangler_pairs": [list(p) for p in layer.entangler_pairs],
                }
                for layer in self.layers
            ],
            "observable_axes": list(self.observable_axes),
            "encoding_seed": self.encoding_seed,
            "input_dim": self.input_dim,
            "max_qubits": self.max_qubits,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ArchitectureSpec":
        doc = json.loads(text)
        try:
            layers = tuple(
                LayerSpec(
                    generator_axes=tuple(entry["generator_axes"]),
                    entangler_pairs=tuple(tuple(p) for p in entry["entangler_pairs"]),
                )
                for entry in doc["layers"]
            )
            return cls(
                m=doc["m"],
                L=doc["L"],
                layers=layers,
                observable_axes=tuple(doc.get("observable_axes", ())),
                encoding_seed=doc["encoding_seed"],
                input_dim=doc["input_dim"],
                max_qubits=doc.get("max_qubits", MAX_QUBITS_DEFAULT),
            )
        except KeyError as exc:
            raise StructuralError(f"architecture document missing field {exc}") from exc


def observable_matrix(axis: str) -> np.ndarray:
    if axis not in _PAULI:
        raise StructuralError(f"unknown observable axis {axis!r}")
    return _PAULI[axis]


def _brickwall_pairs(m: int, ell: int, close_ring: bool = False) -> tuple[tuple[int, int], ...]:
    if ell % 2 == 1:
        pairs = [(k, k + 1) for k in range(0, m - 1, 2)]
    else:
        pairs = [(k, k + 1) for k in range(1, m - 1, 2)]
        if close_ring and m % 2 == 0 and m > 2:
            pairs.append((m - 1, 0))
    return tuple(pairs)


def _uniform_layers(m: int, L: int, axes: str | tuple[str, ...], pair_fn) -> tuple[LayerSpec, ...]:
    if isinstance(axes, str):
        axes = (axes,) * m
    return tuple(LayerSpec(generator_axes=axes, entangler_pairs=pair_fn(ell)) for ell in range(1, L + 1))


def brickwall(m: int, L: int, generator_axes: str | tuple[str, ...] = "x", **kwargs) -> ArchitectureSpec:
    """Nearest-neighbour CZ brick-wall architecture (the default gate family)."""
    layers = _uniform_layers(m, L, generator_axes, lambda ell: _brickwall_pairs(m, ell))
    return ArchitectureSpec(m=m, L=L, layers=layers, **kwargs)


def ring(m: int, L: int, generator_axes: str | tuple[str, ...] = "x", **kwargs) -> ArchitectureSpec:
    """Brick-wall with the closing (m-1, 0) pair on even layers."""
    layers = _uniform_layers(m, L, generator_axes, lambda ell: _brickwall_pairs(m, ell, close_ring=True))
    return ArchitectureSpec(m=m, L=L, layers=layers, **kwargs)


def product(m: int, L: int, generator_axes: str | tuple[str, ...] = "x", **kwargs) -> ArchitectureSpec:
    """Entangler-free architecture; every qubit evolves independently."""
    layers = _uniform_layers(m, L, generator_axes, lambda ell: ())
    return ArchitectureSpec(m=m, L=L, layers=layers, **kwargs)


def initial_state(m: int) -> np.ndarray:
    state = np.zeros(2**m, dtype=complex)
    state[0] = 1.0
    return state


# -- batched gate kernels (states have shape (B, 2**m)) ----------------------


def _view1(states: np.ndarray, m: int, k: int) -> np.ndarray:
    return states.reshape(states.shape[0], 2 ** (m - k - 1), 2, 2**k)


def _rotate_batch(states: np.ndarray, m: int, k: int, axis: str, angles: np.ndarray) -> None:
    cos = np.cos(angles)[:, None, None]
    sin = np.sin(angles)[:, None, None]
    view = _view1(states, m, k)
    if axis == "z":
        view[:, :, 0, :] *= cos - 1j * sin
        view[:, :, 1, :] *= cos + 1j * sin
        return
    top = view[:, :, 0, :].copy()
    bot = view[:, :, 1, :]
    if axis == "x":
        view[:, :, 0, :] = cos * top - 1j * sin * bot
        view[:, :, 1, :] = -1j * sin * top + cos * bot
    elif axis == "y":
        view[:, :, 0, :] = cos * top - sin * bot
        view[:, :, 1, :] = sin * top + cos * bot
    else:
        raise StructuralError(f"unknown generator axis {axis!r}")


def _phase_batch(states: np.ndarray, m: int, k: int, phase0: complex, phase1: complex) -> None:
    view = _view1(states, m, k)
    view[:, :, 0, :] *= phase0
    view[:, :, 1, :] *= phase1


def _cz_batch(states: np.ndarray, m: int, a: int, b: int) -> None:
    hi, lo = max(a, b), min(a, b)
    view = states.reshape(
        states.shape[0], 2 ** (m - hi - 1), 2, 2 ** (hi - lo - 1), 2, 2**lo
    )
    view[:, :, 1, :, 1, :] *= -1.0


def _apply_pauli_batch(states: np.ndarray, m: int, k: int, axis: str) -> np.ndarray:
    out = states.copy()
    view = _view1(out, m, k)
    if axis == "z":
        view[:, :, 1, :] *= -1.0
    elif axis == "x":
        view[:, :, [0, 1], :] = view[:, :, [1, 0], :]
    elif axis == "y":
        top = view[:, :, 0, :].copy()
        view[:, :, 0, :] = -1j * view[:, :, 1, :]
        view[:, :, 1, :] = 1j * top
    else:
        raise StructuralError(f"unknown axis {axis!r}")
    return out


def _pauli_sandwich_batch(bra: np.ndarray, ket: np.ndarray, m: int, k: int, axis: str) -> np.ndarray:
    """<bra_b| P_k |ket_b> per batch row, without materializing P_k |ket>."""
    bra_v = _view1(bra, m, k)
    ket_v = _view1(ket, m, k)
    b0, b1 = bra_v[:, :, 0, :], bra_v[:, :, 1, :]
    k0, k1 = ket_v[:, :, 0, :], ket_v[:, :, 1, :]
    if axis == "z":
        return np.sum(np.conj(b0) * k0, axis=(1, 2)) - np.sum(np.conj(b1) * k1, axis=(1, 2))
    if axis == "x":
        return np.sum(np.conj(b0) * k1, axis=(1, 2)) + np.sum(np.conj(b1) * k0, axis=(1, 2))
    if axis == "y":
        return -1j * np.sum(np.conj(b0) * k1, axis=(1, 2)) + 1j * np.sum(np.conj(b1) * k0, axis=(1, 2))
    raise StructuralError(f"unknown axis {axis!r}")


def _check_inputs(arch: ArchitectureSpec, thetas: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != arch.n_params:
        raise StructuralError(
            f"parameter vectors have length {thetas.shape[1]}, expected {arch.n_params}"
        )
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (arch.input_dim,):
        raise StructuralError(f"input has shape {x.shape}, expected ({arch.input_dim},)")
    return thetas, x


def _apply_layer_batch(
    states: np.ndarray, arch: ArchitectureSpec, ell: int, thetas: np.ndarray, x: np.ndarray
) -> None:
    layer = arch.layers[ell - 1]
    m = arch.m
    for k in range(m):
        angles = thetas[:, param_index(m, ell, k)]
        _rotate_batch(states, m, k, layer.generator_axes[k], angles)
    for k in range(m):
        phi = float(arch.encoding_weights[ell - 1, k] @ x)
        if phi != 0.0:
            _phase_batch(states, m, k, np.exp(-0.5j * phi), np.exp(0.5j * phi))
    for a, b in layer.entangler_pairs:
        _cz_batch(states, m, a, b)


def run_circuit_batch(arch: ArchitectureSpec, thetas: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Circuit output states for a batch of parameter vectors, shape (B, 2**m)."""
    thetas, x = _check_inputs(arch, thetas, x)
    states = np.zeros((thetas.shape[0], 2**arch.m), dtype=complex)
    states[:, 0] = 1.0
    for ell in range(1, arch.L + 1):
        _apply_layer_batch(states, arch, ell, thetas, x)
    norms = np.linalg.norm(states, axis=1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > _NORM_TOL:
        raise StructuralError(f"statevector norm drifted by {worst!r}")
    return states


def expectations_batch(states: np.ndarray, arch: ArchitectureSpec) -> np.ndarray:
    """Per-qubit observable expectations for each batch row, shape (B, m)."""
    m = arch.m
    out = np.empty((states.shape[0], m))
    for k in range(m):
        axis = arch.observable_axes[k]
        view = _view1(states, m, k)
        a0, a1 = view[:, :, 0, :], view[:, :, 1, :]
        if axis == "z":
            val = np.sum(np.abs(a0) ** 2, axis=(1, 2)) - np.sum(np.abs(a1) ** 2, axis=(1, 2))
        elif axis == "x":
            val = 2.0 * np.sum((np.conj(a0) * a1).real, axis=(1, 2))
        elif axis == "y":
            val = 2.0 * np.sum((1j * np.conj(a1) * a0).real, axis=(1, 2))
        else:
            raise StructuralError(f"unknown observable axis {axis!r}")
        out[:, k] = val
    return out


def gradient_adjoint_batch(arch: ArchitectureSpec, thetas: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Exact gradients of sum_k f_k for a batch of parameter vectors, (B, Lm).

    One forward and one backward sweep per batch; equivalent to
    parameter-shift (agreement enforced in tests to 1e-10) at a cost of
    O(L * m) gate applications for the whole gradient.
    """
    thetas, x = _check_inputs(arch, thetas, x)
    m = arch.m
    ket = run_circuit_batch(arch, thetas, x)
    bra = np.zeros_like(ket)
    for k in range(m):
        bra += _apply_pauli_batch(ket, m, k, arch.observable_axes[k])

    grad = np.zeros((thetas.shape[0], arch.n_params))
    for ell in range(arch.L, 0, -1):
        layer = arch.layers[ell - 1]
        for a, b in reversed(layer.entangler_pairs):
            _cz_batch(ket, m, a, b)
            _cz_batch(bra, m, a, b)
        for k in range(m):
            phi = float(arch.encoding_weights[ell - 1, k] @ x)
            if phi != 0.0:
                _phase_batch(ket, m, k, np.exp(0.5j * phi), np.exp(-0.5j * phi))
                _phase_batch(bra, m, k, np.exp(0.5j * phi), np.exp(-0.5j * phi))
        for k in range(m):
            axis = layer.generator_axes[k]
            grad[:, param_index(m, ell, k)] = (
                2.0 * _pauli_sandwich_batch(bra, ket, m, k, axis).imag
            )
        for k in range(m):
            angles = -thetas[:, param_index(m, ell, k)]
            axis = layer.generator_axes[k]
            _rotate_batch(ket, m, k, axis, angles)
            _rotate_batch(bra, m, k, axis, angles)
    return grad


# -- single-state public operations ------------------------------------------


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """exp(-i * P * theta) for a Pauli involution P (closed form)."""
    return np.cos(theta) * np.eye(2, dtype=complex) - 1j * np.sin(theta) * _PAULI[axis]


def apply_layer(
    state: np.ndarray,
    arch: ArchitectureSpec,
    ell: int,
    theta: np.ndarray,
    x: np.ndarray,
) -> np.ndarray:
    """Apply layer ``ell`` (rotations, then the fixed input-dependent part).

    Returns a new statevector; the input is not modified.
    """
    if not 1 <= ell <= arch.L:
        raise StructuralError(f"layer index {ell} outside 1..{arch.L}")
    if state.shape != (2**arch.m,):
        raise StructuralError(
            f"state has shape {state.shape}, expected ({2 ** arch.m},)"
        )
    thetas, x = _check_inputs(arch, theta, x)
    out = state[None, :].astype(complex).copy()
    _apply_layer_batch(out, arch, ell, thetas, x)
    return out[0]


def run_circuit(arch: ArchitectureSpec, theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Full circuit on |0...0>: layer L applied last."""
    return run_circuit_batch(arch, theta, x)[0]


def expect_local(state: np.ndarray, axis: str, k: int) -> float:
    """<state| P_k |state> for the single-qubit Pauli ``axis`` on qubit ``k``."""
    n_amp = state.shape[0]
    m = int(n_amp).bit_length() - 1
    if 2**m != n_amp:
        raise StructuralError("statevector length is not a power of two")
    if not 0 <= k < m:
        raise StructuralError(f"qubit index {k} outside 0..{m - 1}")
    if axis not in _PAULI:
        raise StructuralError(f"unknown observable axis {axis!r}")
    val = _pauli_sandwich_batch(state[None, :], state[None, :], m, k, axis)[0]
    return float(val.real)


def expectations_all(state: np.ndarray, arch: ArchitectureSpec) -> np.ndarray:
    """Vector of the m single-qubit observable expectations (unnormalized)."""
    return expectations_batch(state[None, :], arch)[0]


def gradient_adjoint(arch: ArchitectureSpec, theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Exact gradient of sum_k f_k by one forward and one backward sweep."""
    return gradient_adjoint_batch(arch, theta, x)[0]
