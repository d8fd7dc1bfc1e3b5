"""Pure-Python SMO backend (numpy-vectorized per working-set step).

Same algorithm and selection order as the compiled ``_smo`` extension, so
both backends follow the same path up to floating-point summation order.
"""

import numpy as np

TAU = 1e-12


def solve(K, y, C, tol, max_iter, trace=None):
    """Maximize sum(a) - a'Qa/2 s.t. y'a = 0, 0 <= a <= C, with Q = yy' * K.

    Returns ``(alpha, bias, n_iter, converged)``. When ``trace`` is a list,
    the dual objective after every step is appended to it.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    m = y.shape[0]
    alpha = np.zeros(m)
    G = -np.ones(m)  # gradient of a'Qa/2 - sum(a)
    diag = np.diagonal(K).copy()
    pos = y > 0
    objective = 0.0
    converged = False
    n_iter = 0
    while n_iter < max_iter:
        at_upper = alpha >= C
        at_lower = alpha <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        minus_yG = -y * G
        if not up.any() or not low.any():
            converged = True
            break
        cand = np.where(up, minus_yG, -np.inf)
        # last index among maximizers, matching the compiled loop's ">="
        i = m - 1 - int(np.argmax(cand[::-1]))
        g_max = cand[i]
        g_min = np.min(minus_yG[low])
        if g_max - g_min < tol:
            converged = True
            break
        b = g_max - minus_yG
        eligible = low & (b > 0)
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(eligible, -(b * b) / a, np.inf)
        j = m - 1 - int(np.argmin(score[::-1]))

        old_i, old_j = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        if yi != yj:
            quad = diag[i] + diag[j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        d_i, d_j = ai - old_i, aj - old_j
        alpha[i], alpha[j] = ai, aj
        if trace is not None:
            # change of the dual objective for a two-coordinate move
            qij = yi * yj * K[i, j]
            objective -= (G[i] * d_i + G[j] * d_j
                          + 0.5 * (diag[i] * d_i * d_i + diag[j] * d_j * d_j)
                          + qij * d_i * d_j)
            trace.append(objective)
        G += y * (yi * d_i * K[i] + yj * d_j * K[j])
        n_iter += 1
    return alpha, _bias(alpha, G, y, C), n_iter, converged


def _bias(alpha, G, y, C):
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(-np.mean(yG[free]))
    at_upper = alpha >= C
    ub_mask = np.where(at_upper, y < 0, y > 0)
    lb_mask = ~ub_mask
    ub = np.min(yG[ub_mask]) if ub_mask.any() else np.inf
    lb = np.max(yG[lb_mask]) if lb_mask.any() else -np.inf
    if not np.isfinite(ub):
        ub = lb
    if not np.isfinite(lb):
        lb = ub
    return float(-(ub + lb) / 2.0)
