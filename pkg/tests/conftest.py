"""Shared helpers: seeded random piecewise profiles for property tests."""

import numpy as np

from hpoincare.profiles import PowerSegment, RadialProfile, zero_tail


def random_profile(seed, compact=True):
    """Random positive piecewise profile built from closed-form-invertible
    segment kinds (constant, pure power, affine)."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    edges = np.concatenate([[0.0], np.sort(rng.uniform(0.2, 12.0, k))])
    segs = []
    for a, b in zip(edges[:-1], edges[1:]):
        kind = rng.choice(["constant", "power", "affine"])
        if kind == "constant" or a == 0.0 and kind == "power":
            segs.append(PowerSegment(a, b, [(float(rng.uniform(0.1, 3.0)), 0.0)]))
        elif kind == "power":
            c = float(rng.uniform(0.3, 3.0))
            e = float(rng.uniform(-0.9, 1.2))
            segs.append(PowerSegment(a, b, [(c, e)]))
        else:
            # positive affine piece: value at both ends drawn positive
            va, vb = rng.uniform(0.1, 3.0, 2)
            slope = (vb - va) / (b - a)
            segs.append(PowerSegment(a, b, [(float(va - slope * a), 0.0),
                                            (float(slope), 1.0)]))
    if compact:
        segs.append(zero_tail(edges[-1]))
        tail = np.inf
    else:
        c = float(rng.uniform(0.5, 2.0)) * edges[-1] ** 1.5
        segs.append(PowerSegment(edges[-1], np.inf, [(c, -1.5)]))
        tail = 1.5
    return RadialProfile(segs, tail_bound=tail)
