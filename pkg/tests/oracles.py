"""Independent closed-form oracles shared by several test files."""
import cmath

import numpy as np


def nested_sqrt_oracle(c, n):
    """All branches of z^2 - 2 backward from c by the quadratic formula.

    Returns, for k = 1..n, the list of spherical |(f^k)'| over all 2^k branches,
    computed as a product of Euclidean factors 2|w| times the endpoint factor
    (1 + |w_k|^2) / (1 + |c|^2).
    """
    levels = [[(complex(c), 1.0)]]
    for _ in range(n):
        nxt = []
        for y, eu in levels[-1]:
            s = cmath.sqrt(y + 2)
            for w in (s, -s):
                nxt.append((w, eu * 2 * abs(w)))
        levels.append(nxt)
    out = []
    for k in range(1, n + 1):
        out.append([eu * (1 + abs(w) ** 2) / (1 + abs(c) ** 2) for w, eu in levels[k]])
    return out


def chebyshev_closed_form(k):
    """Minimum over the 2^k branches of z^2 - 2 back from 0: endpoints 2cos(theta)."""
    theta = (2 * np.arange(2**k) + 1) * np.pi / 2 ** (k + 1)
    return float(np.min(2**k * (1 + 4 * np.cos(theta) ** 2) / np.sin(theta)))
