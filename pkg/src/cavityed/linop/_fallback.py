"""Pure-numpy kernels; same signatures and summation order as ``_kernels``."""

import numpy as np

NAME = "numpy"


def band_accumulate(out, src, offsets, bands, coeff):
    """out[a, i, b] += coeff * sum_k bands[k, i] * src[a, i + offsets[k], b]."""
    n = src.shape[1]
    for k in range(len(offsets)):
        off = int(offsets[k])
        lo, hi = max(0, -off), min(n, n - off)
        if lo >= hi:
            continue
        w = coeff * bands[k, lo:hi]
        out[:, lo:hi, :] += w[None, :, None] * src[:, lo + off:hi + off, :]


def diag_accumulate(out, src, diag, coeff):
    """out += coeff * diag * src with ``diag`` broadcast over leading axes."""
    m = diag.size
    o = out.reshape(-1, m)
    s = src.reshape(-1, m)
    d = diag.reshape(-1)
    if coeff == 1.0:
        o += d * s
    else:
        o += (coeff * d) * s
