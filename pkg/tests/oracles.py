"""Independent brute-force oracles the fast implementations are checked against."""

import numpy as np


def naive_conv(x: np.ndarray, kernel: np.ndarray, bias=None) -> np.ndarray:
    """Quadruple-loop same-padding cross-correlation; (C_in, H, W) input."""
    c_out, c_in, k, _ = kernel.shape
    _, h, w = x.shape
    pad = k // 2
    out = np.zeros((c_out, h, w))
    for o in range(c_out):
        for r in range(h):
            for c in range(w):
                acc = 0.0
                for ci in range(c_in):
                    for i in range(k):
                        for j in range(k):
                            rr, cc = r + i - pad, c + j - pad
                            if 0 <= rr < h and 0 <= cc < w:
                                acc += kernel[o, ci, i, j] * x[ci, rr, cc]
                out[o, r, c] = acc + (bias[o] if bias is not None else 0.0)
    return out


def monte_carlo_kl(mu, sigma, prior_sigma, n_draws, rng) -> float:
    """E_q[ln q - ln p] estimated by sampling, summed over weights."""
    mu = np.asarray(mu, dtype=float).ravel()
    sigma = np.asarray(sigma, dtype=float).ravel()
    total = 0.0
    for m, s in zip(mu, sigma):
        w = rng.normal(m, s, n_draws)
        log_q = -0.5 * np.log(2 * np.pi * s**2) - (w - m) ** 2 / (2 * s**2)
        log_p = -0.5 * np.log(2 * np.pi * prior_sigma**2) - w**2 / (2 * prior_sigma**2)
        total += float((log_q - log_p).mean())
    return total


def ema_brute_force(r, alpha):
    """Direct recurrence evaluation, list arithmetic only."""
    ema = [0.0]
    for k in range(1, len(r)):
        ema.append((1 - alpha) * ema[-1] + alpha * (r[k] - r[k - 1]))
    return max(ema), min(ema)


def steady_state_brute_force(r):
    delta = max(r) - min(r)
    return delta, delta / min(r)


def finite_difference_grads(loss_fn, arrays: dict, h=1e-6) -> dict:
    """Central differences over every entry of every array, in place."""
    grads = {}
    for name, arr in arrays.items():
        g = np.zeros_like(arr, dtype=float)
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + h
            lp = loss_fn()
            arr[idx] = orig - h
            lm = loss_fn()
            arr[idx] = orig
            g[idx] = (lp - lm) / (2 * h)
            it.iternext()
        grads[name] = g
    return grads


def relative_error(a, b, floor=1e-10) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    denom = np.maximum(np.abs(a) + np.abs(b), floor)
    return float(np.max(np.abs(a - b) / denom))
