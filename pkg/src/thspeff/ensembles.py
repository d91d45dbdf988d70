"""Random spreading matrices for the time-hopping and binary DS ensembles.

A spreading matrix is stored in its compact form: for every user ``k`` and
every block ``b`` the slot index of the single nonzero chip and its sign.
The dense ``N x K`` matrix is derived on demand. Binary DS is the special
case ``Ns == N`` (one chip per block), so both ensembles share one sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

_MASK64 = (1 << 64) - 1

Kind = Literal["TH", "DS"]


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Mix a base seed with any number of indices into a new 64-bit seed.

    Stable across platforms and Python versions, so a grid can be extended
    without changing the streams of points already computed.
    """
    h = _splitmix64(seed & _MASK64)
    for i in indices:
        h = _splitmix64(h ^ _splitmix64((int(i) + 0x632BE59BD9B4E019) & _MASK64))
    return h


def make_rng(seed: int, *indices: int) -> np.random.Generator:
    """Counter-based generator determined by ``(seed, *indices)``."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *indices)))


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of a TH(Ns, Nh) or binary DS ensemble.

    For ``kind="DS"`` the pulse count is forced to ``N``.
    """

    kind: Kind
    N: int
    K: int
    Ns: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("TH", "DS"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.N <= 0 or self.K <= 0:
            raise ValueError(f"N and K must be positive (got N={self.N}, K={self.K})")
        if self.kind == "DS":
            object.__setattr__(self, "Ns", self.N)
        if self.Ns <= 0:
            raise ValueError(f"Ns must be positive (got {self.Ns})")
        if self.N % self.Ns:
            raise ValueError(f"Ns={self.Ns} does not divide N={self.N}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def Nh(self) -> int:
        return self.N // self.Ns

    @property
    def beta(self) -> float:
        return self.K / self.N

    @classmethod
    def th(cls, N: int, K: int, Ns: int = 1, seed: int = 0) -> "EnsembleSpec":
        return cls("TH", N, K, Ns, seed)

    @classmethod
    def ds(cls, N: int, K: int, seed: int = 0) -> "EnsembleSpec":
        return cls("DS", N, K, N, seed)

    @classmethod
    def from_load(cls, kind: Kind, N: int, beta: float, Ns: int = 1, seed: int = 0):
        K = int(round(beta * N))
        return cls(kind, N, max(K, 1), Ns, seed)

    def replace(self, **changes) -> "EnsembleSpec":
        fields = dict(kind=self.kind, N=self.N, K=self.K, Ns=self.Ns, seed=self.seed)
        fields.update(changes)
        return EnsembleSpec(**fields)


@dataclass(frozen=True, eq=False)
class SpreadingMatrix:
    """One realization of a spreading matrix.

    ``slots[k, b]`` is the position (``0 <= slot < Nh``) of the pulse of user
    ``k`` inside block ``b``; ``signs[k, b]`` is ``+1`` or ``-1``.
    """

    spec: EnsembleSpec
    slots: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        K, Ns, Nh = self.spec.K, self.spec.Ns, self.spec.Nh
        slots = np.asarray(self.slots, dtype=np.int64)
        signs = np.asarray(self.signs, dtype=np.int8)
        if slots.shape != (K, Ns) or signs.shape != (K, Ns):
            raise ValueError(f"expected ({K}, {Ns}) slot/sign arrays, got {slots.shape}")
        if slots.size and (slots.min() < 0 or slots.max() >= Nh):
            raise ValueError("slot index out of range")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +1 or -1")
        slots.setflags(write=False)
        signs.setflags(write=False)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "signs", signs)

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def K(self) -> int:
        return self.spec.K

    @property
    def Ns(self) -> int:
        return self.spec.Ns

    @property
    def beta(self) -> float:
        return self.spec.beta

    @cached_property
    def chips(self) -> np.ndarray:
        """Absolute chip index of every pulse, shape ``(K, Ns)``."""
        out = self.slots + np.arange(self.Ns) * self.spec.Nh
        out.setflags(write=False)
        return out

    @cached_property
    def entries(self) -> np.ndarray:
        """Dense ``N x K`` matrix (Fortran order, read-only)."""
        S = np.zeros((self.N, self.K), order="F")
        users = np.repeat(np.arange(self.K), self.Ns)
        S[self.chips.ravel(), users] = self.signs.ravel() / math.sqrt(self.Ns)
        S.setflags(write=False)
        return S

    @classmethod
    def from_dense(cls, entries, Ns: int, kind: Kind | None = None, seed: int = 0):
        """Parse a dense matrix with the (Ns, N/Ns) block structure.

        Raises ``ValueError`` if some block of some column is not 1-sparse
        with amplitude ``1/sqrt(Ns)``.
        """
        S = np.asarray(entries, dtype=float)
        if S.ndim != 2:
            raise ValueError("expected a 2-D matrix")
        N, K = S.shape
        if kind is None:
            kind = "DS" if Ns == N else "TH"
        spec = EnsembleSpec(kind, N, K, Ns, seed)
        Nh = spec.Nh
        blocks = S.T.reshape(K, Ns, Nh)
        nz = blocks != 0
        if not np.all(nz.sum(axis=2) == 1):
            raise ValueError("every block must hold exactly one nonzero entry")
        slots = nz.argmax(axis=2)
        values = np.take_along_axis(blocks, slots[..., None], axis=2)[..., 0]
        if not np.allclose(np.abs(values), 1 / math.sqrt(Ns), rtol=1e-12, atol=0):
            raise ValueError("nonzero entries must have magnitude 1/sqrt(Ns)")
        return cls(spec, slots, np.sign(values).astype(np.int8))


def sample(spec: EnsembleSpec, *indices: int) -> SpreadingMatrix:
    """Draw one matrix; ``(spec.seed, *indices)`` fixes the result.

    Slot positions are drawn first (uniform over the ``Nh`` chips of each
    block), then signs (uniform over +-1), all independent.
    """
    rng = make_rng(spec.seed, *indices)
    slots = rng.integers(0, spec.Nh, size=(spec.K, spec.Ns))
    signs = (2 * rng.integers(0, 2, size=(spec.K, spec.Ns)) - 1).astype(np.int8)
    return SpreadingMatrix(spec, slots, signs)


def nonzero_positions(m: SpreadingMatrix) -> list[list[tuple[int, int, int]]]:
    """Per column, the ``(block, slot, sign)`` triple of every pulse."""
    return [
        [(b, int(m.slots[k, b]), int(m.signs[k, b])) for b in range(m.Ns)]
        for k in range(m.K)
    ]


def from_positions(spec: EnsembleSpec, positions) -> SpreadingMatrix:
    """Inverse of :func:`nonzero_positions`."""
    slots = np.zeros((spec.K, spec.Ns), dtype=np.int64)
    signs = np.ones((spec.K, spec.Ns), dtype=np.int8)
    for k, column in enumerate(positions):
        if len(column) != spec.Ns:
            raise ValueError(f"column {k} has {len(column)} pulses, expected {spec.Ns}")
        for block, slot, sign in column:
            slots[k, block] = slot
            signs[k, block] = sign
    return SpreadingMatrix(spec, slots, signs)
