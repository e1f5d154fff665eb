"""Symmetrization toolkit in the volume coordinate.

Distribution function, decreasing rearrangement, running-average maximal
function, the Hardy inequality check with the conjugate-exponent constant,
and radialization back onto hyperbolic space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import geometry
from .numerics import DEFAULT_QUADRATURE, DomainError, QuadratureError
from .profiles import (FuncSegment, LogAffineSegment, PowerSegment,
                       RadialProfile, zero_tail)


@dataclass
class _Piece:
    """A maximal interval on which |v| is monotone and v single-signed."""

    a: float
    b: float  # may be inf (then |v| decays to 0)
    seg: object
    sign: float
    va: float  # |v| at the left end
    vb: float  # |v| at the right end (limit for infinite pieces)

    @property
    def increasing(self):
        return self.vb > self.va


_PROBE = 129


def _segment_cuts(seg):
    """Interior abscissae where v or v' changes sign within the segment."""
    lo, hi = seg.s_lo, seg.s_hi
    if np.isinf(hi):
        return []
    if isinstance(seg, PowerSegment) and len(seg.terms) <= 1:
        return []
    eps = (hi - lo) * 1e-9
    if lo > 0 and hi / lo > 10:
        xs = np.geomspace(lo + eps, hi - eps, _PROBE)
    else:
        xs = np.linspace(lo + eps, hi - eps, _PROBE)
    cuts = []
    for fn in (seg.value, seg.deriv):
        ys = np.asarray(fn(xs), dtype=float)
        sign_change = np.where(np.diff(np.signbit(ys)))[0]
        for i in sign_change:
            try:
                root = brentq(lambda x: float(fn(np.array([x]))[0]), xs[i], xs[i + 1])
            except ValueError:
                continue
            cuts.append(root)
    return sorted(cuts)


def _monotone_pieces(profile):
    if profile._pieces_cache is not None:
        return profile._pieces_cache
    pieces = []
    for seg in profile.segments:
        if seg.is_zero():
            continue
        edges = [seg.s_lo] + _segment_cuts(seg) + [seg.s_hi]
        for a, b in zip(edges[:-1], edges[1:]):
            if np.isinf(b):
                probe = max(2 * a, 1.0)
                va = abs(float(seg.value(np.array([a if a > 0 else probe * 1e-9]))[0]))
                sign = np.sign(float(seg.value(np.array([probe]))[0])) or 1.0
                pieces.append(_Piece(a, b, seg, sign, va, 0.0))
                continue
            mid = 0.5 * (a + b)
            with np.errstate(divide="ignore"):
                va = abs(float(seg.value(np.array([a if a > 0 else min(b * 1e-12, mid)]))[0]))
                vb = abs(float(seg.value(np.array([b]))[0]))
            sign = np.sign(float(seg.value(np.array([mid]))[0])) or 1.0
            pieces.append(_Piece(a, b, seg, sign, va, vb))
    profile._pieces_cache = pieces
    return pieces


def _invert_piece(piece, y):
    """Abscissae where |v| = y inside the piece (y within the value range)."""
    seg, sign = piece.seg, piece.sign
    v = sign * np.asarray(y, dtype=float)  # target for v itself
    if isinstance(seg, PowerSegment):
        terms = seg.terms
        if len(terms) == 1:
            c, e = terms[0]
            if e == 0.0:
                raise ValueError("plateau pieces are never inverted")
            return (v / c) ** (1.0 / e)
        expos = {e for _, e in terms}
        if expos <= {0.0, 1.0}:
            a0 = sum(c for c, e in terms if e == 0.0)
            b1 = sum(c for c, e in terms if e == 1.0)
            return (v - a0) / b1
    if isinstance(seg, LogAffineSegment):
        return np.exp((v - seg.a) / seg.b)
    return _bisect_piece(piece, np.asarray(y, dtype=float))


def _bisect_piece(piece, y):
    lo = np.full_like(y, piece.a if piece.a > 0 else piece.b * 1e-15)
    if np.isinf(piece.b):
        hi = np.full_like(y, max(2 * piece.a, 1.0))
        absv = lambda s: np.abs(piece.seg.value(s))
        for _ in range(300):
            need = absv(hi) > y
            if not np.any(need):
                break
            hi = np.where(need, hi * 4.0, hi)
    else:
        hi = np.full_like(y, piece.b)
        absv = lambda s: np.abs(piece.seg.value(s))
    # |v| monotone on the piece; log-space bisection
    dec = not piece.increasing
    for _ in range(90):
        mid = np.sqrt(lo * hi)
        above = absv(mid) > y
        go_right = above if dec else ~above
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return np.sqrt(lo * hi)


def _measure_above(profile, y):
    """mu(y) = |{s : |v(s)| > y}|, vectorized over positive levels y."""
    y = np.asarray(y, dtype=float)
    total = np.zeros_like(y)
    for piece in _monotone_pieces(profile):
        lo_val, hi_val = min(piece.va, piece.vb), max(piece.va, piece.vb)
        if np.isinf(piece.b):
            inside = (y < hi_val) & (y > 0)
            if np.any(inside):
                x = _invert_piece(piece, y[inside])
                contrib = np.zeros_like(y)
                contrib[inside] = x - piece.a
                total = total + contrib
            continue
        length = piece.b - piece.a
        full = y < lo_val
        inside = (y >= lo_val) & (y < hi_val)
        contrib = np.where(full, length, 0.0)
        if np.any(inside):
            x = _invert_piece(piece, y[inside])
            part = (piece.b - x) if piece.increasing else (x - piece.a)
            c2 = np.zeros_like(y)
            c2[inside] = part
            contrib = contrib + c2
        total = total + contrib
    return total


def distribution_function(v: RadialProfile, t):
    """Measure of the strict super-level set {s : |v(s)| > t}, t > 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("levels must be positive (the measure may be infinite at 0)")
    out = _measure_above(v, np.atleast_1d(t_arr))
    return float(out[0]) if t_arr.ndim == 0 else out


def _sup_value(profile):
    return max([max(p.va, p.vb) for p in _monotone_pieces(profile)], default=0.0)


def decreasing_rearrangement(v: RadialProfile) -> RadialProfile:
    """Nonincreasing rearrangement of |v|, equimeasurable with |v|."""
    if v.nonincreasing:
        return v
    pieces = _monotone_pieces(v)
    if not pieces:
        return RadialProfile([zero_tail(0.0)], nonincreasing=True, tail_bound=np.inf)
    sup = _sup_value(v)
    if not np.isfinite(sup):
        raise QuadratureError("unbounded profiles are not supported by the rearrangement")
    has_tail = any(np.isinf(p.b) for p in pieces)
    # total measure of the support (finite iff compactly supported)
    if has_tail:
        total = np.inf
    else:
        total = float(_measure_above(v, np.array([sup * 1e-18]))[0])
    # verify all super-level sets are finite
    probe = _measure_above(v, np.array([sup * 1e-12]))
    if not np.all(np.isfinite(probe)):
        raise QuadratureError(f"super-level set at level {sup * 1e-12:g} has infinite measure")

    floor = sup * 1e-18

    def fstar(t):
        t = np.asarray(t, dtype=float)
        ylo = np.full_like(t, floor)
        yhi = np.full_like(t, sup)
        dead = _measure_above(v, ylo) <= t  # essentially below resolution
        for _ in range(90):
            mid = np.sqrt(ylo * yhi)
            above = _measure_above(v, mid) > t
            ylo = np.where(above, mid, ylo)
            yhi = np.where(above, yhi, mid)
        out = np.where(dead, 0.0, ylo)
        if np.isfinite(total):
            out = np.where(t >= total, 0.0, out)
        return out

    # split points in t: measures at the critical values of |v|
    criticals = sorted({p.va for p in pieces} | {p.vb for p in pieces})
    criticals = [c for c in criticals if np.isfinite(c) and c > 0]
    t_breaks = set()
    for c in criticals:
        for yy in (c * (1 - 1e-9), c, c * (1 + 1e-9)):
            if 0 < yy <= sup:
                m = float(_measure_above(v, np.array([yy]))[0])
                if np.isfinite(m) and m > 0 and (
                        not np.isfinite(total) or m < total * (1 - 1e-9)):
                    t_breaks.add(m)
    t_breaks = sorted(t_breaks)
    merged = []
    for tb in t_breaks:
        if not merged or tb > merged[-1] * (1 + 1e-9):
            merged.append(tb)
    edges = [0.0] + merged + [total]
    segs = []
    for a, b in zip(edges[:-1], edges[1:]):
        if not (b > a * (1 + 1e-12) and b > a):
            continue
        segs.append(FuncSegment(a, b, fstar))
    if np.isfinite(total):
        segs.append(zero_tail(total))
        tail_bound = np.inf
    else:
        tail_bound = v.tail_bound
    return RadialProfile(segs, nonincreasing=True, tail_bound=tail_bound)


def maximal_function(vstar: RadialProfile) -> RadialProfile:
    """Running average (1/s) * integral of vstar over [0, s]."""
    first = vstar.segments[0]
    if isinstance(first, PowerSegment) and any(e <= -1.0 for _, e in first.terms):
        raise QuadratureError("profile is not integrable at 0")

    def avg(s):
        s = np.asarray(s, dtype=float)
        return vstar.running_integral(s) / s

    def avg_d1(s):
        s = np.asarray(s, dtype=float)
        return (vstar(s) - avg(s)) / s

    segs = []
    prev = 0.0
    for seg in vstar.segments:
        hi = seg.s_hi
        if np.isinf(hi):
            break
        segs.append(FuncSegment(prev, hi, avg, d1=avg_d1))
        prev = hi
    support = vstar.support_end()
    if support is not None and support <= prev:
        mass = float(vstar.running_integral(np.array([support]))[0])
        segs.append(PowerSegment(prev, np.inf, [(mass, -1.0)] if mass != 0 else []))
        tail_bound = 1.0
    else:
        tb = vstar.tail_bound
        tail_bound = min(tb, 1.0) if tb is not None else None
        segs.append(FuncSegment(prev, np.inf, avg, d1=avg_d1))
    return RadialProfile(segs, nonincreasing=vstar.nonincreasing, tail_bound=tail_bound)


@dataclass(frozen=True)
class HardyReport:
    lhs: float
    rhs: float
    ratio: float
    holds: bool


def hardy_check(vstar: RadialProfile, p: float,
                cfg=DEFAULT_QUADRATURE) -> HardyReport:
    """Compare the L^p norm of the running average against the conjugate-
    exponent multiple of the L^p norm of the profile."""
    if p <= 1:
        raise DomainError("the Hardy inequality requires p > 1")
    p_conj = p / (p - 1.0)
    base = vstar.lp_power(p, cfg) ** (1.0 / p)
    if not np.isfinite(base):
        raise QuadratureError("divergent L^p norm of the profile")
    if base == 0.0:
        return HardyReport(0.0, 0.0, 0.0, True)
    lhs = maximal_function(vstar).lp_power(p, cfg) ** (1.0 / p)
    rhs = p_conj * base
    return HardyReport(lhs, rhs, lhs / rhs, lhs <= rhs * (1 + 1e-10))


class RadializedProfile:
    """A volume-coordinate profile composed with the ball-volume map,
    yielding a radial function of the geodesic radius."""

    def __init__(self, vstar: RadialProfile, sp: geometry.SpaceParams):
        self.vstar = vstar
        self.sp = sp

    def __call__(self, rho):
        return self.vstar(geometry.ball_volume(rho, self.sp))


def radialize(vstar: RadialProfile, sp: geometry.SpaceParams) -> RadializedProfile:
    return RadializedProfile(vstar, sp)
