# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tick kernel: the fast backend.

Bit-for-bit equivalent to kernels/tick_py.py; keep the two in sync. The
extension is built with -ffp-contract=off so the C arithmetic matches the
Python fallback exactly (no fused multiply-add).
"""

import numpy as np
cimport numpy as cnp

BACKEND_NAME = "cython"

cdef double _INV_2_53 = 2.0 ** -53
cdef unsigned long long _GAMMA = 0x9E3779B97F4A7C15ULL
cdef unsigned long long _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef unsigned long long _MIX2 = 0x94D049BB133111EBULL

cdef double _WALK_MAX_KM = 7.0
cdef double _BIKE_MAX_KM = 15.0

DEF N_MODES = 4
DEF N_CRITERIA = 6


cdef inline unsigned long long _next(unsigned long long *state) nogil:
    cdef unsigned long long z
    state[0] = state[0] + _GAMMA
    z = state[0]
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline int _usual(signed char[:, ::1] hist, int[:, ::1] counts,
                       Py_ssize_t i, int start, int length,
                       signed char fallback, int cap) nogil:
    cdef int best, m, k
    if length == 0:
        return fallback
    best = counts[i, 0]
    for m in range(1, N_MODES):
        if counts[i, m] > best:
            best = counts[i, m]
    for k in range(length - 1, -1, -1):
        m = hist[i, (start + k) % cap]
        if counts[i, m] == best:
            return m
    return fallback


def tick_once(
    double[:, ::1] objective,
    double[:, :, ::1] prototypes,
    double[:, ::1] priorities,
    double[:] distance,
    unsigned char[:] car_access,
    unsigned char[:] bus_access,
    signed char[:] current_mode,
    signed char[:] initial_usual,
    signed char[:, ::1] hist,
    int[:] hist_start,
    int[:] hist_len,
    int[:, ::1] hist_count,
    rng_state,
    biases_on,
    habits_on,
    disruption_prob,
    unsigned char[:] out_routine,
    unsigned char[:] out_biased,
    unsigned char[:] out_constrained,
    double[:] out_sat,
):
    """Advance every agent by one decision; returns the new RNG state."""
    cdef Py_ssize_t n = distance.shape[0]
    cdef int cap = <int>hist.shape[1]
    cdef unsigned long long state = <unsigned long long>(<object>rng_state)
    cdef bint biases = bool(biases_on)
    cdef bint habits = bool(habits_on)
    cdef double dp = float(disruption_prob)

    cdef Py_ssize_t i
    cdef int u, m, c, c_mode, chosen, length, old
    cdef int best, obest, gbest, n_avail, u2
    cdef double h, h2, one_minus_h, u_disrupt, u_habit
    cdef double s, so, v, best_s, obest_s, gbest_s, tot, denom
    cdef bint disrupted
    cdef bint avail[N_MODES]

    with nogil:
        for i in range(n):
            u = _usual(hist, hist_count, i, hist_start[i], hist_len[i],
                       initial_usual[i], cap)
            if hist_len[i] == 0:
                h = 0.0
            else:
                h = <double>hist_count[i, u] / <double>hist_len[i]

            avail[0] = distance[i] < _BIKE_MAX_KM
            avail[1] = bus_access[i] != 0
            avail[2] = car_access[i] != 0
            avail[3] = distance[i] < _WALK_MAX_KM
            n_avail = 0
            for m in range(N_MODES):
                if avail[m]:
                    n_avail += 1

            u_disrupt = <double>(_next(&state) >> 11) * _INV_2_53
            u_habit = <double>(_next(&state) >> 11) * _INV_2_53

            disrupted = u_disrupt < dp
            if disrupted and avail[u] and n_avail > 1:
                avail[u] = False

            c_mode = current_mode[i]
            out_routine[i] = 0
            out_biased[i] = 0
            out_constrained[i] = 0
            if habits and not disrupted and avail[u] and u_habit < h:
                chosen = u
                out_routine[i] = 1
            else:
                one_minus_h = 1.0 - h
                best = -1
                best_s = 0.0
                obest = -1
                obest_s = 0.0
                gbest = -1
                gbest_s = 0.0
                for m in range(N_MODES):
                    s = 0.0
                    if biases:
                        for c in range(N_CRITERIA):
                            v = objective[m, c] * (h * prototypes[u, m, c] + one_minus_h)
                            if v > 10.0:
                                v = 10.0
                            elif v < 0.0:
                                v = 0.0
                            s += v * priorities[i, c]
                    else:
                        for c in range(N_CRITERIA):
                            s += objective[m, c] * priorities[i, c]
                    if gbest < 0 or s > gbest_s or (s == gbest_s and m == c_mode):
                        gbest = m
                        gbest_s = s
                    if avail[m]:
                        if best < 0 or s > best_s or (s == best_s and m == c_mode):
                            best = m
                            best_s = s
                        if biases:
                            so = 0.0
                            for c in range(N_CRITERIA):
                                so += objective[m, c] * priorities[i, c]
                            if obest < 0 or so > obest_s or (so == obest_s and m == c_mode):
                                obest = m
                                obest_s = so
                chosen = best
                if biases and chosen != obest:
                    out_biased[i] = 1
                if not avail[gbest]:
                    out_constrained[i] = 1

            length = hist_len[i]
            if length == cap:
                old = hist[i, hist_start[i]]
                hist_count[i, old] -= 1
                hist[i, hist_start[i]] = <signed char>chosen
                hist_start[i] = (hist_start[i] + 1) % cap
                hist_count[i, chosen] += 1
            else:
                hist[i, (hist_start[i] + length) % cap] = <signed char>chosen
                hist_len[i] = length + 1
                hist_count[i, chosen] += 1
            current_mode[i] = <signed char>chosen

            u2 = _usual(hist, hist_count, i, hist_start[i], hist_len[i],
                        initial_usual[i], cap)
            h2 = <double>hist_count[i, u2] / <double>hist_len[i]
            s = 0.0
            tot = 0.0
            if biases:
                one_minus_h = 1.0 - h2
                for c in range(N_CRITERIA):
                    v = objective[chosen, c] * (h2 * prototypes[u2, chosen, c] + one_minus_h)
                    if v > 10.0:
                        v = 10.0
                    elif v < 0.0:
                        v = 0.0
                    s += v * priorities[i, c]
                    tot += priorities[i, c]
            else:
                for c in range(N_CRITERIA):
                    s += objective[chosen, c] * priorities[i, c]
                    tot += priorities[i, c]
            denom = 10.0 * tot
            if denom > 0.0:
                out_sat[i] = s / denom
            else:
                out_sat[i] = 0.0

    return int(state)


def satisfaction_pass(
    double[:, ::1] objective,
    double[:, :, ::1] prototypes,
    double[:, ::1] priorities,
    signed char[:] current_mode,
    signed char[:] initial_usual,
    signed char[:, ::1] hist,
    int[:] hist_start,
    int[:] hist_len,
    int[:, ::1] hist_count,
    biases_on,
    double[:] out_sat,
):
    """Normalized score of each agent's current mode under its current basis."""
    cdef Py_ssize_t n = current_mode.shape[0]
    cdef int cap = <int>hist.shape[1]
    cdef bint biases = bool(biases_on)
    cdef Py_ssize_t i
    cdef int u, c, chosen
    cdef double h, one_minus_h, s, tot, v, denom

    with nogil:
        for i in range(n):
            u = _usual(hist, hist_count, i, hist_start[i], hist_len[i],
                       initial_usual[i], cap)
            if hist_len[i] == 0:
                h = 0.0
            else:
                h = <double>hist_count[i, u] / <double>hist_len[i]
            chosen = current_mode[i]
            s = 0.0
            tot = 0.0
            if biases:
                one_minus_h = 1.0 - h
                for c in range(N_CRITERIA):
                    v = objective[chosen, c] * (h * prototypes[u, chosen, c] + one_minus_h)
                    if v > 10.0:
                        v = 10.0
                    elif v < 0.0:
                        v = 0.0
                    s += v * priorities[i, c]
                    tot += priorities[i, c]
            else:
                for c in range(N_CRITERIA):
                    s += objective[chosen, c] * priorities[i, c]
                    tot += priorities[i, c]
            denom = 10.0 * tot
            if denom > 0.0:
                out_sat[i] = s / denom
            else:
                out_sat[i] = 0.0
