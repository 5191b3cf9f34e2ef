"""Pure-Python tick kernel: the fallback backend.

Mirrors the Cython kernel operation for operation, in the same arithmetic
order, so both backends produce bit-identical streams. Keep the two files
in sync; the parity test (tests/test_backends.py) enforces it.

Array layout (shared with the compiled kernel):
  objective      float64[4, 6]      environment values
  prototypes     float64[4, 4, 6]   filter prototype per usual mode
  priorities     float64[n, 6]
  distance       float64[n]
  car_access     uint8[n], bus_access uint8[n]
  current_mode   int8[n]            mutated in place
  initial_usual  int8[n]
  hist           int8[n, H] ring    oldest at hist_start, hist_len entries
  hist_count     int32[n, 4]        per-mode counts over the ring
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53

_N_MODES = 4
_N_CRITERIA = 6
_WALK_MAX_KM = 7.0
_BIKE_MAX_KM = 15.0


def _usual_and_habit(hist_row, start, length, counts, fallback):
    """Most frequent mode (recency tie-break) and its frequency."""
    if length == 0:
        return fallback, 0.0
    best = counts[0]
    for m in range(1, _N_MODES):
        if counts[m] > best:
            best = counts[m]
    cap = len(hist_row)
    u = -1
    for k in range(length - 1, -1, -1):
        m = hist_row[(start + k) % cap]
        if counts[m] == best:
            u = m
            break
    return u, counts[u] / length


def tick_once(
    objective, prototypes, priorities, distance, car_access, bus_access,
    current_mode, initial_usual, hist, hist_start, hist_len, hist_count,
    rng_state, biases_on, habits_on, disruption_prob,
    out_routine, out_biased, out_constrained, out_sat,
):
    """Advance every agent by one decision; returns the new RNG state."""
    n = len(distance)
    obj = objective.tolist()
    proto = prototypes.tolist()
    pri = priorities.tolist()
    dist = distance.tolist()
    car = car_access.tolist()
    bus = bus_access.tolist()
    cur = current_mode.tolist()
    init_u = initial_usual.tolist()
    hist_l = hist.tolist()
    starts = hist_start.tolist()
    lens = hist_len.tolist()
    counts = hist_count.tolist()
    routine_o = [0] * n
    biased_o = [0] * n
    constrained_o = [0] * n
    sat_o = [0.0] * n

    state = rng_state & _MASK
    cap = hist.shape[1]
    biases = bool(biases_on)
    habits = bool(habits_on)
    dp = float(disruption_prob)

    for i in range(n):
        hist_row = hist_l[i]
        cnt = counts[i]
        u, h = _usual_and_habit(hist_row, starts[i], lens[i], cnt, init_u[i])

        avail = [
            dist[i] < _BIKE_MAX_KM,
            bus[i] != 0,
            car[i] != 0,
            dist[i] < _WALK_MAX_KM,
        ]
        n_avail = avail[0] + avail[1] + avail[2] + avail[3]

        state = (state + _GAMMA) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        u_disrupt = ((z ^ (z >> 31)) >> 11) * _INV_2_53
        state = (state + _GAMMA) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        u_habit = ((z ^ (z >> 31)) >> 11) * _INV_2_53

        disrupted = u_disrupt < dp
        if disrupted and avail[u] and n_avail > 1:
            avail[u] = False

        c_mode = cur[i]
        prow = pri[i]
        if habits and not disrupted and avail[u] and u_habit < h:
            chosen = u
            routine_o[i] = 1
        else:
            pu = proto[u]
            one_minus_h = 1.0 - h
            best = -1
            best_s = 0.0
            obest = -1
            obest_s = 0.0
            gbest = -1
            gbest_s = 0.0
            for m in range(_N_MODES):
                orow = obj[m]
                s = 0.0
                if biases:
                    pum = pu[m]
                    for c in range(_N_CRITERIA):
                        v = orow[c] * (h * pum[c] + one_minus_h)
                        if v > 10.0:
                            v = 10.0
                        elif v < 0.0:
                            v = 0.0
                        s += v * prow[c]
                else:
                    for c in range(_N_CRITERIA):
                        s += orow[c] * prow[c]
                if gbest < 0 or s > gbest_s or (s == gbest_s and m == c_mode):
                    gbest = m
                    gbest_s = s
                if avail[m]:
                    if best < 0 or s > best_s or (s == best_s and m == c_mode):
                        best = m
                        best_s = s
                    if biases:
                        so = 0.0
                        for c in range(_N_CRITERIA):
                            so += orow[c] * prow[c]
                        if obest < 0 or so > obest_s or (so == obest_s and m == c_mode):
                            obest = m
                            obest_s = so
            chosen = best
            if biases and chosen != obest:
                biased_o[i] = 1
            if not avail[gbest]:
                constrained_o[i] = 1

        length = lens[i]
        if length == cap:
            old = hist_row[starts[i]]
            cnt[old] -= 1
            hist_row[starts[i]] = chosen
            starts[i] = (starts[i] + 1) % cap
            cnt[chosen] += 1
        else:
            hist_row[(starts[i] + length) % cap] = chosen
            lens[i] = length + 1
            cnt[chosen] += 1
        cur[i] = chosen

        u2, h2 = _usual_and_habit(hist_row, starts[i], lens[i], cnt, init_u[i])
        s = 0.0
        tot = 0.0
        orow = obj[chosen]
        if biases:
            puc = proto[u2][chosen]
            one_minus_h2 = 1.0 - h2
            for c in range(_N_CRITERIA):
                v = orow[c] * (h2 * puc[c] + one_minus_h2)
                if v > 10.0:
                    v = 10.0
                elif v < 0.0:
                    v = 0.0
                s += v * prow[c]
                tot += prow[c]
        else:
            for c in range(_N_CRITERIA):
                s += orow[c] * prow[c]
                tot += prow[c]
        denom = 10.0 * tot
        sat_o[i] = s / denom if denom > 0.0 else 0.0

    current_mode[:] = np.asarray(cur, dtype=current_mode.dtype)
    hist[:] = np.asarray(hist_l, dtype=hist.dtype)
    hist_start[:] = np.asarray(starts, dtype=hist_start.dtype)
    hist_len[:] = np.asarray(lens, dtype=hist_len.dtype)
    hist_count[:] = np.asarray(counts, dtype=hist_count.dtype)
    out_routine[:] = np.asarray(routine_o, dtype=out_routine.dtype)
    out_biased[:] = np.asarray(biased_o, dtype=out_biased.dtype)
    out_constrained[:] = np.asarray(constrained_o, dtype=out_constrained.dtype)
    out_sat[:] = np.asarray(sat_o, dtype=out_sat.dtype)
    return state


def satisfaction_pass(
    objective, prototypes, priorities, current_mode, initial_usual,
    hist, hist_start, hist_len, hist_count, biases_on, out_sat,
):
    """Normalized score of each agent's current mode under its current basis."""
    n = len(current_mode)
    obj = objective.tolist()
    proto = prototypes.tolist()
    pri = priorities.tolist()
    cur = current_mode.tolist()
    init_u = initial_usual.tolist()
    hist_l = hist.tolist()
    starts = hist_start.tolist()
    lens = hist_len.tolist()
    counts = hist_count.tolist()
    biases = bool(biases_on)
    sat_o = [0.0] * n

    for i in range(n):
        u, h = _usual_and_habit(hist_l[i], starts[i], lens[i], counts[i], init_u[i])
        chosen = cur[i]
        prow = pri[i]
        orow = obj[chosen]
        s = 0.0
        tot = 0.0
        if biases:
            puc = proto[u][chosen]
            one_minus_h = 1.0 - h
            for c in range(_N_CRITERIA):
                v = orow[c] * (h * puc[c] + one_minus_h)
                if v > 10.0:
                    v = 10.0
                elif v < 0.0:
                    v = 0.0
                s += v * prow[c]
                tot += prow[c]
        else:
            for c in range(_N_CRITERIA):
                s += orow[c] * prow[c]
                tot += prow[c]
        denom = 10.0 * tot
        sat_o[i] = s / denom if denom > 0.0 else 0.0

    out_sat[:] = np.asarray(sat_o, dtype=out_sat.dtype)
