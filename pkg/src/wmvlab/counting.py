"""Exact solution counting for cubic Weyl sums.

Even moments of g(alpha, beta; X) over the torus are integers: by
orthogonality the s-th moment counts s-tuples whose linear sums and cube
sums balance.  This module builds the key spectra (how many t-tuples hit
each (sum, cube-sum) key), squares them into moment counts, handles the
three-equation system with keys (sum, square-sum, cube-sum), and evaluates
the two-sided fourth-moment identity together with its reciprocal-distance
majorant.

Spectra are built by enumerate / sort / run-length-encode, chunked on the
leading coordinate, with a deterministic size-balanced pairwise merge, so
output bits never depend on the worker count.
"""

from __future__ import annotations

import itertools
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .phase import FixedPhase, SCALE, kahan_add, unit

_MASK = SCALE - 1

ENUM_GUARD = 10 ** 10  # hard cap on X^t enumeration work
SPECTRUM_MAGIC = b"WMVSPEC1"


@dataclass(frozen=True)
class KeySpectrum:
    """Sorted key -> count table for t-tuples over [1, X].

    `components` are the key coordinates as parallel int64 columns in
    strictly increasing lexicographic order; `counts` are positive int64.
    Two-column keys are (linear sum, cube sum); three-column keys are
    (linear sum, square sum, cube sum).
    """

    X: int
    arity: int
    components: Tuple[np.ndarray, ...]
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.counts)

    def mass(self) -> int:
        """Total tuple count; equals X^arity exactly."""
        return int(self.counts.sum())

    def sum_of_squares(self) -> int:
        c = self.counts
        return int(np.dot(c, c))

    def entries(self) -> Iterator[Tuple[Tuple[int, ...], int]]:
        cols = self.components
        for i in range(len(self.counts)):
            yield tuple(int(col[i]) for col in cols), int(self.counts[i])


# -- sort / RLE / merge plumbing --------------------------------------------

def _rle_sorted(cols: Sequence[np.ndarray],
                weights: np.ndarray | None = None) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    """Collapse lex-sorted key columns into unique keys plus counts."""
    n = len(cols[0])
    if n == 0:
        return tuple(c[:0] for c in cols), np.zeros(0, dtype=np.int64)
    change = cols[0][1:] != cols[0][:-1]
    for c in cols[1:]:
        change |= c[1:] != c[:-1]
    starts = np.concatenate(([0], np.flatnonzero(change) + 1))
    uniq = tuple(c[starts] for c in cols)
    if weights is None:
        bounds = np.concatenate((starts, [n]))
        counts = np.diff(bounds)
    else:
        counts = np.add.reduceat(weights, starts)
    return uniq, counts.astype(np.int64, copy=False)


def _lex_order(cols: Sequence[np.ndarray]) -> np.ndarray:
    if len(cols) == 1:
        return np.argsort(cols[0], kind="stable")
    # np.lexsort treats its last key as primary
    return np.lexsort(tuple(reversed(cols)))


def _sorted_rle(cols: Sequence[np.ndarray]) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    order = _lex_order(cols)
    return _rle_sorted(tuple(c[order] for c in cols))


def _merge_rle(a: Tuple[Tuple[np.ndarray, ...], np.ndarray],
               b: Tuple[Tuple[np.ndarray, ...], np.ndarray]) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    cols = tuple(np.concatenate((ca, cb)) for ca, cb in zip(a[0], b[0]))
    weights = np.concatenate((a[1], b[1]))
    order = _lex_order(cols)
    return _rle_sorted(tuple(c[order] for c in cols), weights[order])


def _push_balanced(stack, item) -> None:
    """Binary-counter merge: each stack slot holds a merge of 2^j chunks, so
    every raw entry passes through O(log #chunks) merges regardless of how
    the run-length encoding compresses."""
    stack.append([item, 1])
    while len(stack) >= 2 and stack[-2][1] == stack[-1][1]:
        top = stack.pop()
        stack[-1][0] = _merge_rle(stack[-1][0], top[0])
        stack[-1][1] += top[1]


def _drain(stack) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    while len(stack) > 1:
        top = stack.pop()
        stack[-1][0] = _merge_rle(stack[-1][0], top[0])
        stack[-1][1] += top[1]
    return stack[0][0]


def _build_chunked(X: int, arity: int, chunk_cols, workers: int):
    """Run chunk builders (one per leading coordinate), merge deterministically.

    `chunk_cols(x1)` returns the key columns of all tuples whose leading
    coordinate is x1.  Results are merged in x1 order, so worker count
    cannot change a single output bit.
    """
    xs = range(1, X + 1)

    def job(x1: int):
        return _sorted_rle(chunk_cols(x1))

    stack: List[list] = []
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            for rle in ex.map(job, xs):
                _push_balanced(stack, rle)
    else:
        for x1 in xs:
            _push_balanced(stack, job(x1))
    return _drain(stack)


# -- spectra -----------------------------------------------------------------

def _guard(X: int, t: int) -> None:
    if X < 1:
        raise ValueError("X must be positive")
    if X ** t > ENUM_GUARD:
        raise ValueError(f"enumeration of {X}^{t} tuples exceeds the 10^10 guard")


def cubic_spectrum(X: int, t: int, workers: int = 1) -> KeySpectrum:
    """Exact counts of ordered t-tuples over [1,X] by (sum, cube-sum) key."""
    if t not in (1, 2, 3):
        raise ValueError("arity must be 1, 2, or 3")
    _guard(X, t)
    r = np.arange(1, X + 1, dtype=np.int64)
    r3 = r * r * r
    if t == 1:
        # already strictly increasing in both coordinates
        cols = (r.copy(), r3.copy())
        counts = np.ones(X, dtype=np.int64)
        return KeySpectrum(X, 1, cols, counts)
    if t == 2:
        def pair_cols(x1: int):
            return (r + x1, r3 + x1 ** 3)
        cols, counts = _build_chunked(X, 2, pair_cols, workers)
        return KeySpectrum(X, 2, cols, counts)
    base_n = np.add.outer(r, r).ravel()
    base_m = np.add.outer(r3, r3).ravel()
    nbits = int(3 * X).bit_length()
    mbits = int(3 * X ** 3).bit_length()
    if nbits + mbits <= 63:
        # flat integer sort on (sum << mbits) | cube-sum; lex order preserved
        base_key = (base_n << mbits) | base_m

        def triple_cols(x1: int):
            return (base_key + ((np.int64(x1) << mbits) | np.int64(x1 ** 3)),)

        (packed,), counts = _build_chunked(X, 3, triple_cols, workers)
        cols = (packed >> mbits, packed & ((np.int64(1) << mbits) - 1))
    else:
        def triple_cols(x1: int):
            return (base_n + x1, base_m + x1 ** 3)

        cols, counts = _build_chunked(X, 3, triple_cols, workers)
    return KeySpectrum(X, 3, cols, counts)


def power_sum_spectrum(X: int, t: int, workers: int = 1) -> KeySpectrum:
    """Ordered t-tuple counts keyed by (sum, square-sum, cube-sum), t <= 3."""
    if t not in (1, 2, 3):
        raise ValueError("arity must be 1, 2, or 3")
    _guard(X, t)
    r = np.arange(1, X + 1, dtype=np.int64)
    r2 = r * r
    r3 = r2 * r
    # widths for the packed fast path: sums bounded by 3X, 3X^2, 3X^3
    b1 = int(3 * X).bit_length()
    b2 = int(3 * X ** 2).bit_length()
    b3 = int(3 * X ** 3).bit_length()
    packable = b1 + b2 + b3 <= 63
    if t == 1:
        return KeySpectrum(X, 1, (r.copy(), r2.copy(), r3.copy()),
                           np.ones(X, dtype=np.int64))
    if t == 2:
        if packable:
            base_key = (((r << b2) | r2) << b3) | r3

            def pair_cols(x1: int):
                add = (((np.int64(x1) << b2) | np.int64(x1 ** 2)) << b3) | np.int64(x1 ** 3)
                return (base_key + add,)

            (packed,), counts = _build_chunked(X, 2, pair_cols, workers)
            cols = _unpack3(packed, b2, b3)
        else:
            def pair_cols(x1: int):
                return (r + x1, r2 + x1 ** 2, r3 + x1 ** 3)

            cols, counts = _build_chunked(X, 2, pair_cols, workers)
        return KeySpectrum(X, 2, cols, counts)
    base_n = np.add.outer(r, r).ravel()
    base_q = np.add.outer(r2, r2).ravel()
    base_m = np.add.outer(r3, r3).ravel()
    if packable:
        base_key = (((base_n << b2) | base_q) << b3) | base_m

        def triple_cols(x1: int):
            add = (((np.int64(x1) << b2) | np.int64(x1 ** 2)) << b3) | np.int64(x1 ** 3)
            return (base_key + add,)

        (packed,), counts = _build_chunked(X, 3, triple_cols, workers)
        cols = _unpack3(packed, b2, b3)
    else:
        def triple_cols(x1: int):
            return (base_n + x1, base_q + x1 ** 2, base_m + x1 ** 3)

        cols, counts = _build_chunked(X, 3, triple_cols, workers)
    return KeySpectrum(X, 3, cols, counts)


def _unpack3(packed: np.ndarray, b2: int, b3: int) -> Tuple[np.ndarray, ...]:
    m3 = (np.int64(1) << b3) - 1
    m2 = (np.int64(1) << b2) - 1
    return (packed >> (b2 + b3), (packed >> b3) & m2, packed & m3)


# -- exact counts ------------------------------------------------------------

def moment_count(X: int, s: int, workers: int = 1) -> int:
    """Exact s-th even moment of |g| over the torus: number of s-tuples with
    balanced linear and cube sums.  s in {2, 4, 6}."""
    if s not in (2, 4, 6):
        raise ValueError("s must be 2, 4, or 6 (torusgrid covers other moments)")
    return cubic_spectrum(X, s // 2, workers=workers).sum_of_squares()


def vinogradov_count(X: int, s: int, workers: int = 1) -> int:
    """Exact count of s-variable solutions of the three-equation system
    sum x^j = sum y^j (j = 1, 2, 3), with ceil(s/2) variables on the left
    and floor(s/2) on the right.  s in {2,..,6}.

    For odd s the two sides have different arities; the join below returns
    the true count (zero: power sums up to degree 3 pin down multisets of
    size <= 3, and padding the short side with 0 leaves [1,X])."""
    if s not in (2, 3, 4, 5, 6):
        raise ValueError("s must be in {2, 3, 4, 5, 6}")
    a, b = (s + 1) // 2, s // 2
    left = power_sum_spectrum(X, a, workers=workers)
    if a == b:
        return left.sum_of_squares()
    right = power_sum_spectrum(X, b, workers=workers)
    return _join_product(left, right)


def _join_product(sa: KeySpectrum, sb: KeySpectrum) -> int:
    ka = _pack_for_disk(sa)
    kb = _pack_for_disk(sb)
    # keys fit in u64 pairs; compare via sorted membership on both halves
    total = 0
    _, ia, ib = np.intersect1d(ka, kb, assume_unique=True, return_indices=True)
    if len(ia):
        total = int(np.dot(sa.counts[ia], sb.counts[ib]))
    return total


def brute_force_moment(X: int, s: int) -> int:
    """Independent oracle: literal enumeration of all X^s tuples, checking
    the linear and cubic equations directly.  Kept deliberately naive."""
    if s % 2 or s > 8:
        raise ValueError("s must be even and at most 8")
    if not 1 <= X <= 12:
        raise ValueError("X must be in [1, 12]")
    if X ** s > 10 ** 9:
        raise ValueError("X^s exceeds the 10^9 oracle guard")
    cubes = [0] + [x ** 3 for x in range(1, X + 1)]
    h = s // 2
    count = 0
    for tup in itertools.product(range(1, X + 1), repeat=s):
        if sum(tup[:h]) != sum(tup[h:]):
            continue
        if sum(cubes[x] for x in tup[:h]) != sum(cubes[x] for x in tup[h:]):
            continue
        count += 1
    return count


# -- fourth-moment identity --------------------------------------------------

def beta_fourth_moment(alpha: FixedPhase, X: int) -> float:
    """Integral over beta of |g(alpha, beta; X)|^4, done exactly in beta.

    Orthogonality in beta leaves the sum of e((x1^3+x2^3-x3^3-x4^3) alpha)
    over quadruples with x1+x2 = x3+x4; grouping by the shared pair sum n
    turns it into sum_n |c_n|^2 with c_n the cube-phase pair sum, which is
    exactly real and O(X^2) work.
    """
    if not 1 <= X <= 3000:
        raise ValueError("X must be in [1, 3000]")
    fa = alpha.frac
    cube_phase = [(x * x * x * fa) & _MASK for x in range(0, X + 1)]
    total = comp = 0.0
    for n in range(2, 2 * X + 1):
        cre = cim = 0.0
        for x1 in range(max(1, n - X), min(X, n - 1) + 1):
            c, sn = unit((cube_phase[x1] + cube_phase[n - x1]) & _MASK)
            cre += c
            cim += sn
        total, comp = kahan_add(total, comp, cre * cre + cim * cim)
    return total


def u_identity_rhs(alpha: FixedPhase, X: int) -> float:
    """The same fourth moment after the substitution u1 = x2-x3, u2 = x1-x3,
    u3 = x1+x2: a sum of e(-3 u1 u2 u3 alpha) over integer triples in
    (-X, 2X]^3 subject to u3+u2-u1, u3+u1-u2, u3-u1-u2, u3+u1+u2 all being
    even and in [1, 2X].  Those four constraints are asserted literally for
    every term; the loop bounds merely enumerate their solution set.
    """
    if not 1 <= X <= 3000:
        raise ValueError("X must be in [1, 3000]")
    fa = alpha.frac
    total = comp = 0.0
    two_x = 2 * X
    for u1 in range(1 - X, two_x + 1):
        a1 = abs(u1)
        f1 = (-3 * u1 * fa) & _MASK
        for u2 in range(1 - X, two_x + 1):
            lo = 2 + a1 + abs(u2)
            hi = two_x - a1 - abs(u2)
            if lo > hi:
                continue
            f12 = (u2 * f1) & _MASK
            step = (2 * f12) & _MASK
            cur = (lo * f12) & _MASK
            for u3 in range(lo, hi + 1, 2):
                q1 = u3 + u2 - u1
                q2 = u3 + u1 - u2
                q3 = u3 - u1 - u2
                q4 = u3 + u1 + u2
                assert q1 % 2 == 0 and 1 <= q1 <= two_x
                assert q2 % 2 == 0 and 1 <= q2 <= two_x
                assert q3 % 2 == 0 and 1 <= q3 <= two_x
                assert q4 % 2 == 0 and 1 <= q4 <= two_x
                c, _ = unit(cur)
                total, comp = kahan_add(total, comp, c)
                cur = (cur + step) & _MASK
    return total


def reciprocal_sum_bound(alpha: FixedPhase, X: int) -> float:
    """Majorant sum over 1 <= u1, u2 <= 2X of min(X, 1/||6 alpha u1 u2||),
    with || . || the distance to the nearest integer taken on the exact
    fixed-point value of alpha."""
    if not 1 <= X <= 10 ** 4:
        raise ValueError("X must be in [1, 10^4]")
    fa = alpha.frac
    xf = float(X)
    total = comp = 0.0
    two_x = 2 * X
    for u1 in range(1, two_x + 1):
        step = (6 * u1 * fa) & _MASK
        # row sum over u2 >= u1 once; (u1, u2) and (u2, u1) contribute equally
        cur = (step * u1) & _MASK
        row = rcomp = 0.0
        first = True
        for _u2 in range(u1, two_x + 1):
            d = cur if cur <= SCALE - cur else SCALE - cur
            term = xf if d == 0 else min(xf, SCALE / d)
            if first:
                diag = term
                first = False
            else:
                row, rcomp = kahan_add(row, rcomp, term)
            cur = (cur + step) & _MASK
        total, comp = kahan_add(total, comp, 2.0 * row + diag)
    return total


# -- disk spill --------------------------------------------------------------

def _pack_for_disk(spec: KeySpectrum) -> np.ndarray:
    """128-bit disk keys as object ints (lex order = numeric order)."""
    cols = spec.components
    if len(cols) == 2:
        n, m = cols
        if len(n) and (int(n.max()).bit_length() > 64 or int(m.max()).bit_length() > 64):
            raise ValueError("key component exceeds 64 bits")
        return (n.astype(object) << 64) | m.astype(object)
    n1, n2, n3 = cols
    if len(n1):
        if int(n1.max()).bit_length() > 24 or int(n2.max()).bit_length() > 40 \
                or int(n3.max()).bit_length() > 64:
            raise ValueError("key component exceeds its packed width")
    return (n1.astype(object) << 104) | (n2.astype(object) << 64) | n3.astype(object)


def save_spectrum(spec: KeySpectrum, path: str) -> None:
    """Spill a spectrum: 32-byte header (magic, X, arity, entry count), then
    sorted little-endian records of 16-byte key and 8-byte count."""
    keys = _pack_for_disk(spec)
    lo = np.array([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys], dtype=np.uint64)
    hi = np.array([int(k) >> 64 for k in keys], dtype=np.uint64)
    rec = np.empty(len(spec), dtype=np.dtype([("lo", "<u8"), ("hi", "<u8"), ("count", "<u8")]))
    rec["lo"] = lo
    rec["hi"] = hi
    rec["count"] = spec.counts.astype(np.uint64)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(SPECTRUM_MAGIC)
        fh.write(struct.pack("<QQQ", spec.X, spec.arity, len(spec)))
        fh.write(rec.tobytes())
    os.replace(tmp, path)


def load_spectrum(path: str, key_components: int = 2) -> KeySpectrum:
    """Read a spilled spectrum.  The header does not record the key layout,
    so the caller says whether keys are (sum, cube-sum) pairs (2, default)
    or (sum, square-sum, cube-sum) triples (3)."""
    if key_components not in (2, 3):
        raise ValueError("key_components must be 2 or 3")
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SPECTRUM_MAGIC:
            raise ValueError("not a spectrum file (bad magic)")
        X, arity, n_entries = struct.unpack("<QQQ", fh.read(24))
        rec = np.frombuffer(fh.read(24 * n_entries),
                            dtype=np.dtype([("lo", "<u8"), ("hi", "<u8"), ("count", "<u8")]))
    if len(rec) != n_entries:
        raise ValueError("truncated spectrum file")
    if len(rec) and int(rec["lo"].max()) > np.iinfo(np.int64).max:
        raise ValueError("stored key component exceeds the in-memory int64 range")
    lo = rec["lo"].astype(np.int64)
    hi = rec["hi"]
    if key_components == 2:
        cols = (hi.astype(np.int64), lo)
    else:
        n1 = (hi >> 40).astype(np.int64)
        n2 = (hi & np.uint64((1 << 40) - 1)).astype(np.int64)
        cols = (n1, n2, lo)
    counts = rec["count"].astype(np.int64)
    return KeySpectrum(int(X), int(arity), cols, counts)
