"""FFT quadrature for moments of |g| on the 2-torus.

One beta row at a time: scatter the linear phases e(beta x) into buckets
indexed by x^3 mod Malpha, and a single inverse FFT of length Malpha yields
|g| at every alpha grid point of that row.  Memory stays O(Malpha); the full
2-D grid is never materialized.

For even s the integrand |g|^s is a trigonometric polynomial with alpha
frequencies bounded by (s/2)X^3 and beta frequencies by (s/2)X, so the plain
grid mean is the exact integral once the grid exceeds those band limits.
Odd moments (and minor-arc restrictions, whose masks break band-limitedness)
are refined by doubling the grid until successive values stabilize; the
reported error is the last doubling delta, a heuristic and labeled as such.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .arcs import _totients

RealLike = Union[int, float, str, Fraction]

MALPHA_GUARD = 1 << 28


@dataclass(frozen=True)
class GridSpec:
    """Grid sizes for one quadrature level.

    The floors Malpha >= 2X^3+1, Mbeta >= 2X+1 keep |g|^2 below Nyquist on
    any grid this type admits; the auto-choosers round up to powers of two.
    """

    Malpha: int
    Mbeta: int
    X: int

    def __post_init__(self) -> None:
        if self.X < 1:
            raise ValueError("X must be positive")
        if self.Malpha < 2 * self.X ** 3 + 1:
            raise ValueError("Malpha below the 2X^3+1 floor")
        if self.Mbeta < 2 * self.X + 1:
            raise ValueError("Mbeta below the 2X+1 floor")


@dataclass(frozen=True)
class MomentEstimate:
    """A quadrature result; exact=True only when the even-s band-limit
    condition held on the final grid.  boundary_bound, present for
    restricted moments, is the documented bound on arc-edge cell mass:
    (#arcs) * (2Q/X^3) * max|g|^s / Malpha."""

    value: float
    err_est: float
    exact: bool
    spec: GridSpec
    converged: bool = True
    boundary_bound: Optional[float] = None


def _pow2_at_least(n: int) -> int:
    return 1 << max(0, (int(n) - 1).bit_length())


def auto_spec_even(X: int, s: int) -> GridSpec:
    """Smallest power-of-two grid exact for the s-th even moment."""
    ma = _pow2_at_least(max(2 * X ** 3, (s // 2) * X ** 3) + 1)
    mb = _pow2_at_least(max(2 * X, (s // 2) * X) + 1)
    return GridSpec(ma, mb, X)


def auto_spec_start(X: int, s: int) -> GridSpec:
    """Default starting grid for the doubling refinement."""
    half = (s + 1) // 2
    ma = _pow2_at_least((half + 1) * X ** 3)
    mb = _pow2_at_least((half + 1) * 4 * X)
    while ma < 2 * X ** 3 + 1:
        ma *= 2
    while mb < 2 * X + 1:
        mb *= 2
    return GridSpec(ma, mb, X)


def amplitude_row(X: int, spec: GridSpec, j_beta: int) -> np.ndarray:
    """|g(i/Malpha, j_beta/Mbeta; X)| for all i, via one inverse FFT.

    g at the row's grid points is sum_x e(j x / Mbeta) e(i x^3 / Malpha);
    bucketing the x-weights at x^3 mod Malpha makes the i-dependence a pure
    inverse DFT (numpy's backward normalization supplies 1/Malpha, undone by
    the Malpha factor below).
    """
    if X != spec.X:
        raise ValueError("X disagrees with spec.X")
    if not 0 <= j_beta < spec.Mbeta:
        raise ValueError("j_beta out of range")
    if spec.Malpha > MALPHA_GUARD:
        raise ValueError("Malpha exceeds the 2^28 memory guard")
    return np.abs(spec.Malpha * np.fft.ifft(_bucket_row(X, spec, j_beta)))


def _bucket_row(X: int, spec: GridSpec, j_beta: int) -> np.ndarray:
    x = np.arange(1, X + 1, dtype=np.int64)
    angles = 2.0 * np.pi * ((j_beta * x) % spec.Mbeta) / spec.Mbeta
    weights = np.exp(1j * angles)
    idx = (x * x * x) % spec.Malpha
    bucket = np.zeros(spec.Malpha, dtype=np.complex128)
    np.add.at(bucket, idx, weights)
    return bucket


def _pairwise_total(sums: Sequence[float]) -> float:
    """Deterministic binary-tree reduction in index order."""
    level = list(sums)
    if not level:
        return 0.0
    while len(level) > 1:
        nxt = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def _amp_power(row: np.ndarray, s: int) -> np.ndarray:
    """row**s for row = |g| >= 0, by a squaring chain on row^2 (cheap numpy
    multiplies instead of per-element pow)."""
    p = row * row
    e = s // 2
    acc = None
    base = p
    while e:
        if e & 1:
            acc = base if acc is None else acc * base
        e >>= 1
        if e:
            base = base * base
    if acc is None:
        acc = np.ones_like(row)
    return acc * row if s % 2 else acc


def _grid_mean(X: int, s: int, spec: GridSpec,
               keep: Optional[np.ndarray] = None) -> float:
    """Mean of |g|^s over the grid, optionally restricted to alpha indices
    `keep`; rows are reduced pairwise in beta order, so the result is
    run-to-run identical for a given spec."""
    row_sums: List[float] = []
    for j in range(spec.Mbeta):
        row = amplitude_row(X, spec, j)
        if keep is not None:
            row = row[keep]
        row_sums.append(float(_amp_power(row, s).sum()))
    return _pairwise_total(row_sums) / (spec.Malpha * spec.Mbeta)


def even_moment_exact(X: int, s: int) -> MomentEstimate:
    """The s-th moment (s even) by band-limited quadrature: exact up to
    floating-point roundoff, no refinement needed."""
    if s < 2 or s % 2:
        raise ValueError("s must be a positive even integer")
    spec = auto_spec_even(X, s)
    if spec.Malpha > MALPHA_GUARD:
        raise ValueError("exact grid exceeds the 2^28 memory guard")
    value = _grid_mean(X, s, spec)
    return MomentEstimate(value, 0.0, True, spec)


def _refine(X: int, s: int, spec0: GridSpec, tol: float) -> MomentEstimate:
    """Double both grid sizes until successive values agree to tol
    (relative).  Non-convergence within the memory guard returns the best
    value with converged=False."""
    spec = spec0
    prev = None
    err = float("nan")
    while True:
        value = _grid_mean(X, s, spec)
        if prev is not None:
            err = abs(value - prev) / max(abs(value), 1e-300)
            if err <= tol:
                break
        prev = value
        if spec.Malpha * 2 > MALPHA_GUARD:
            return MomentEstimate(value, err, _band_limited(spec, X, s),
                                  spec, converged=False)
        spec = GridSpec(spec.Malpha * 2, spec.Mbeta * 2, X)
    return MomentEstimate(value, err, _band_limited(spec, X, s), spec)


def _band_limited(spec: GridSpec, X: int, s: int) -> bool:
    return (s % 2 == 0 and spec.Malpha >= (s // 2) * X ** 3 + 1
            and spec.Mbeta >= (s // 2) * X + 1)


def moment_estimate(X: int, s: int, tol: float) -> MomentEstimate:
    """I_s(X) by doubling refinement; works for every integer s >= 1.

    Even s converges at the first comparison (band-limited already at the
    starting grid) and comes back flagged exact; odd s carries the last
    doubling delta as its heuristic error."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _refine(X, s, auto_spec_start(X, s), tol)


def arc_mask(spec: GridSpec, Q: RealLike, X: int) -> np.ndarray:
    """Boolean vector over the alpha grid: True where i/Malpha is minor at
    cutoff Q.  Arc membership |q*alpha - a| <= Q/X^3 is evaluated in exact
    rational arithmetic, so the mask agrees with pointwise classification."""
    if X < 1:
        raise ValueError("X must be positive")
    T = Fraction(Q)
    if T < 1 or T * T > X ** 3:
        raise ValueError("Q must lie in [1, X^(3/2)]")
    width = T / X ** 3
    M = spec.Malpha
    minor = np.ones(M, dtype=bool)
    for q in range(1, int(T) + 1):
        for a in range(0, q + 1):
            if math.gcd(a, q) != 1:
                continue
            lo = math.ceil((a - width) * M / q)
            hi = math.floor((a + width) * M / q)
            if lo < 0:
                lo = 0
            if hi > M - 1:
                hi = M - 1
            if lo <= hi:
                minor[lo:hi + 1] = False
    return minor


def _arc_count(Q: RealLike) -> int:
    phi = _totients(int(Fraction(Q)))
    return sum(phi[1:])


def restricted_moment(X: int, s: int, Q: RealLike, tol: float) -> MomentEstimate:
    """Minor-arc moment I_s^*(X; Q): the grid mean of |g|^s over alpha rows
    classified minor at (Q, X), doubling-refined.  1 <= Q <= X."""
    est = restricted_profile(X, s, [Q], tol)
    return est[0]


def restricted_profile(X: int, s: int, Qs: Sequence[RealLike],
                       tol: float) -> List[MomentEstimate]:
    """restricted_moment for several cutoffs on one shared sequence of
    grids: rows are computed once per level and re-used for every mask.
    All cutoffs are refined until the worst one stabilizes, so the returned
    values live on a common final grid and inherit exact mask nesting
    (larger Q never yields a larger value)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    fracs = [Fraction(Q) for Q in Qs]
    for T in fracs:
        if T < 1 or T > X:
            raise ValueError("each Q must lie in [1, X]")
    spec = auto_spec_start(X, s)
    prev: Optional[List[float]] = None
    values: List[float] = []
    errs = [float("nan")] * len(fracs)
    converged = True
    while True:
        keeps = [np.flatnonzero(arc_mask(spec, T, X)) for T in fracs]
        totals = [[] for _ in fracs]
        for j in range(spec.Mbeta):
            vals = _amp_power(amplitude_row(X, spec, j), s)
            for t, keep in zip(totals, keeps):
                t.append(float(vals[keep].sum()))
        values = [_pairwise_total(t) / (spec.Malpha * spec.Mbeta) for t in totals]
        if prev is not None:
            errs = [abs(v - p0) / max(abs(v), 1e-300) for v, p0 in zip(values, prev)]
            if max(errs) <= tol:
                break
        prev = values
        nxt_malpha = spec.Malpha * 2
        if nxt_malpha > MALPHA_GUARD:
            converged = False
            break
        spec = GridSpec(nxt_malpha, spec.Mbeta * 2, X)
    out = []
    for T, v, e in zip(fracs, values, errs):
        bb = _arc_count(T) * (2 * float(T) / X ** 3) * float(X) ** s / spec.Malpha
        out.append(MomentEstimate(v, e, False, spec, converged=converged,
                                  boundary_bound=bb))
    return out


ROW_MAGIC = b"WMVROW1"


def save_row(row: np.ndarray, path: str) -> None:
    """Debug dump of one amplitude row: magic, u64 length, binary64 LE."""
    with open(path, "wb") as fh:
        fh.write(ROW_MAGIC)
        fh.write(struct.pack("<Q", len(row)))
        fh.write(np.asarray(row, dtype="<f8").tobytes())


def load_row(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(7) != ROW_MAGIC:
            raise ValueError("not a row dump (bad magic)")
        (n,) = struct.unpack("<Q", fh.read(8))
        row = np.frombuffer(fh.read(8 * n), dtype="<f8")
    if len(row) != n:
        raise ValueError("truncated row dump")
    return row.copy()
