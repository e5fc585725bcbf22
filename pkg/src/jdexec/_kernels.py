"""Compiled inner loops for event sampling.

These kernels receive a ``numpy.random.Generator`` and draw from it
directly, so stream identity is controlled entirely by the caller.  They
are deliberately free of Python-object state: scalar parameters in,
arrays or scalars out.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FAMILY_EXPONENTIAL = 0
FAMILY_GAMMA = 1
FAMILY_LOGNORMAL = 2


@njit(cache=True)
def _grow(buf, n):
    bigger = np.empty(buf.shape[0] * 2, dtype=np.float64)
    bigger[:n] = buf[:n]
    return bigger


@njit(cache=True)
def _draw_wait(family_id, par0, par1, gen):
    if family_id == FAMILY_EXPONENTIAL:
        return gen.exponential(par0)
    elif family_id == FAMILY_GAMMA:
        return gen.gamma(par0, par1)
    else:
        return gen.lognormal(par0, par1)


@njit(cache=True)
def _step_sign(sign, p_cont, p_cont_prime, gen):
    u = gen.random()
    if sign > 0:
        return 1 if u < p_cont else -1
    return -1 if u < p_cont_prime else 1


@njit(cache=True)
def hawkes_event_times(lambda_base, kernel_scale, kernel_decay, horizon, gen):
    """Event times of a self-exciting process with kernel ``a*exp(-b*t)``.

    Thinning with a bound refreshed after every proposal: between events the
    intensity only decays, so the current intensity is a valid upper bound
    for the whole next waiting interval.
    """
    buf = np.empty(64, dtype=np.float64)
    n = 0
    t = 0.0
    excess = 0.0
    while True:
        bound = lambda_base + excess
        w = gen.exponential(1.0 / bound)
        t = t + w
        if t > horizon:
            break
        excess *= np.exp(-kernel_decay * w)
        if bound * gen.random() <= lambda_base + excess:
            if n == buf.shape[0]:
                buf = _grow(buf, n)
            buf[n] = t
            n += 1
            excess += kernel_scale
    return buf[:n].copy()


@njit(cache=True)
def renewal_event_times(family_id, par0, par1, horizon, gen):
    """Event times of a renewal process with i.i.d. waiting times."""
    buf = np.empty(64, dtype=np.float64)
    n = 0
    t = _draw_wait(family_id, par0, par1, gen)
    while t <= horizon:
        if n == buf.shape[0]:
            buf = _grow(buf, n)
        buf[n] = t
        n += 1
        t = t + _draw_wait(family_id, par0, par1, gen)
    return buf[:n].copy()


@njit(cache=True)
def compound_hawkes_at(
    lambda_base,
    kernel_scale,
    kernel_decay,
    horizon,
    delta,
    p_cont,
    p_cont_prime,
    init_sign,
    gen,
):
    """Event count and summed marks of the self-exciting compound at ``horizon``.

    O(1) memory: marks are walked alongside the thinning loop.  Returns
    ``(count, mark_sum)``.
    """
    count = 0
    mark_sum = 0.0
    sign = init_sign
    t = 0.0
    excess = 0.0
    while True:
        bound = lambda_base + excess
        w = gen.exponential(1.0 / bound)
        t = t + w
        if t > horizon:
            break
        excess *= np.exp(-kernel_decay * w)
        if bound * gen.random() <= lambda_base + excess:
            count += 1
            excess += kernel_scale
            sign = _step_sign(sign, p_cont, p_cont_prime, gen)
            mark_sum += delta * sign
    return count, mark_sum


@njit(cache=True)
def compound_renewal_at(
    family_id,
    par0,
    par1,
    horizon,
    delta,
    p_cont,
    p_cont_prime,
    init_sign,
    gen,
):
    """Event count and summed marks of the renewal compound at ``horizon``."""
    count = 0
    mark_sum = 0.0
    sign = init_sign
    t = _draw_wait(family_id, par0, par1, gen)
    while t <= horizon:
        count += 1
        sign = _step_sign(sign, p_cont, p_cont_prime, gen)
        mark_sum += delta * sign
        t = t + _draw_wait(family_id, par0, par1, gen)
    return count, mark_sum
