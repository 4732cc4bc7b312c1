"""Complex state vectors, proper states, and the pair-correlation functional.

A *proper state* over n basis states has every amplitude equal to +-1/sqrt(n);
it is the quantum encoding of a classical sign assignment. The functional

    S(psi) = sum_{j<l} (2 Re(conj(x_j) x_l))^2
           = |sum_j x_j^2|^2 + (sum_j |x_j|^2)^2 - 2 sum_j |x_j|^4

is computed via the O(n) closed form on the right; it attains its maximum
2 - 2/n exactly on proper states, and near-maximal values certify closeness
to a proper state in trace distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_ATOL = 1e-10
_ANCHOR_EPS = 1e-12


@dataclass(frozen=True)
class StateVec:
    """A normalized complex amplitude vector of dimension >= 2."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("state needs at least 2 amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: |psi| = {norm!r}")
        object.__setattr__(self, "amps", amps)

    @property
    def n(self) -> int:
        return self.amps.size


@dataclass(frozen=True)
class ProperState:
    """Canonical +-1 sign vector (first sign pinned to +1)."""

    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int8)
        if signs.ndim != 1 or signs.size < 2:
            raise ValueError("need at least 2 signs")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +-1")
        if signs[0] != 1:
            raise ValueError("canonical form pins the first sign to +1")
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return self.signs.size

    def to_state(self) -> StateVec:
        return proper_state(self.signs)


@dataclass(frozen=True)
class PolarDecomp:
    """Amplitudes as x_j = global_phase * s_j * r_j * exp(i theta_j).

    Signs s_j are +-1, radii r_j >= 0, and theta_j lies in (-pi/2, pi/2].
    The global phase rotates the anchor amplitude (the first one above
    magnitude 1e-12) onto the positive real axis.
    """

    signs: np.ndarray
    radii: np.ndarray
    thetas: np.ndarray
    anchor: int
    global_phase: complex

    def reconstruct(self) -> np.ndarray:
        return self.global_phase * self.signs * self.radii * np.exp(1j * self.thetas)


def proper_state(signs) -> StateVec:
    """StateVec with amplitudes signs_j / sqrt(n)."""
    signs = np.asarray(signs, dtype=np.float64)
    if signs.size == 0:
        raise ValueError("empty sign vector")
    if not np.all(np.abs(signs) == 1):
        raise ValueError("signs must be +-1")
    return StateVec(signs / np.sqrt(signs.size))


def _check_normalized(amps: np.ndarray) -> None:
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > NORM_ATOL:
        raise ValueError(f"state not normalized: |psi| = {norm!r}")


def s_value(psi: StateVec) -> float:
    """The pair-correlation functional S(psi), via the O(n) closed form."""
    x = psi.amps
    _check_normalized(x)
    sq = np.abs(x) ** 2
    return float(abs(np.sum(x * x)) ** 2 + np.sum(sq) ** 2 - 2 * np.sum(sq * sq))


def s_max(n: int) -> float:
    """Maximum of S over normalized states of dimension n."""
    return 2.0 - 2.0 / n


def polar_decomp(psi: StateVec) -> PolarDecomp:
    x = psi.amps
    anchor = int(np.flatnonzero(np.abs(x) > _ANCHOR_EPS)[0])
    phase = x[anchor] / abs(x[anchor])
    y = x * np.conj(phase)
    re, im = y.real, y.imag
    signs = np.where(re > 0, 1, np.where(re < 0, -1, np.where(im > 0, 1, np.where(im < 0, -1, 1)))).astype(np.int8)
    radii = np.abs(y)
    thetas = np.angle(y * signs)  # in (-pi/2, pi/2] once the sign is factored out
    thetas[radii <= _ANCHOR_EPS] = 0.0
    # Boundary case theta = -pi/2 maps to +pi/2 under the sign convention.
    thetas[thetas <= -np.pi / 2] += np.pi
    return PolarDecomp(signs=signs, radii=radii, thetas=thetas, anchor=anchor, global_phase=complex(phase))


def nearest_proper(psi: StateVec) -> tuple[ProperState, float]:
    """The sign-rounded proper state of psi and the trace distance to it.

    The anchor amplitude fixes the global phase; each rotated amplitude is
    rounded to its sign (zero amplitudes round to +1), which makes the
    result canonical.
    """
    dec = polar_decomp(psi)
    ps = ProperState(dec.signs)
    return ps, trace_distance_pure(psi, ps.to_state())


def trace_distance_pure(a: StateVec, b: StateVec) -> float:
    """sqrt(1 - |<a|b>|^2), the trace distance between two pure states."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    ov = abs(np.vdot(a.amps, b.amps)) ** 2
    return float(np.sqrt(max(0.0, 1.0 - min(ov, 1.0))))


def random_state(n: int, seed) -> StateVec:
    """Haar-random state: normalized isotropic complex Gaussian."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVec(x / np.linalg.norm(x))


def random_near_proper(n: int, noise: float, seed) -> StateVec:
    """A uniformly random proper state under a seeded Gaussian perturbation.

    The perturbation is an isotropic complex Gaussian with per-amplitude
    scale noise * n^(-3/2) (total RMS norm noise/n), then the state is
    renormalized; the suppressed scaling matches the n^-(2+eps) band in
    which near-maximal S certifies closeness to a proper state. noise=0
    returns an exact proper state. Deterministic for a fixed seed.
    """
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    signs[0] = 1.0
    if noise == 0:
        return proper_state(signs)
    scale = noise / n**1.5
    delta = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    x = signs / np.sqrt(n) + delta
    return StateVec(x / np.linalg.norm(x))
