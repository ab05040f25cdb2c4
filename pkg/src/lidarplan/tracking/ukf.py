"""Unscented Kalman filter primitives (scaled sigma points) and the CTRV model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np


class SigmaPointFailure(np.linalg.LinAlgError):
    """Covariance could not be factorised even after adding jitter."""


@dataclass(frozen=True)
class SigmaParams:
    alpha: float = 1.0
    beta: float = 2.0
    kappa: float = 0.0
    jitter: float = 1e-6

    def weights(self, n: int) -> Tuple[np.ndarray, np.ndarray, float]:
        lam = self.alpha ** 2 * (n + self.kappa) - n
        wm = np.full(2 * n + 1, 0.5 / (n + lam))
        wc = wm.copy()
        wm[0] = lam / (n + lam)
        wc[0] = lam / (n + lam) + (1.0 - self.alpha ** 2 + self.beta)
        return wm, wc, lam


def sigma_points(x: np.ndarray, P: np.ndarray, lam: float, jitter: float) -> np.ndarray:
    n = len(x)
    M = (n + lam) * P
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        try:
            L = np.linalg.cholesky(M + jitter * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise SigmaPointFailure("covariance is not positive definite") from exc
    pts = np.empty((2 * n + 1, n))
    pts[0] = x
    pts[1:n + 1] = x + L.T
    pts[n + 1:] = x - L.T
    return pts


def _angle_residual(angle_idx: Sequence[int]):
    idx = list(angle_idx)

    def residual(a, b):
        d = np.asarray(a, dtype=float) - b
        if idx:
            d[..., idx] = (d[..., idx] + np.pi) % (2 * np.pi) - np.pi
        return d
    return residual


def unscented_mean(sigmas: np.ndarray, wm: np.ndarray, angle_idx: Sequence[int]) -> np.ndarray:
    if not angle_idx:
        return wm @ sigmas
    ref = sigmas[0]
    d = _angle_residual(angle_idx)(sigmas, ref)
    m = ref + wm @ d
    m[list(angle_idx)] = (m[list(angle_idx)] + np.pi) % (2 * np.pi) - np.pi
    return m


def ukf_predict_raw(x, P, fx: Callable, dt: float, Q, params: SigmaParams,
                    angle_idx: Sequence[int] = ()):
    n = len(x)
    wm, wc, lam = params.weights(n)
    sig = sigma_points(x, P, lam, params.jitter)
    sig_f = np.array([fx(s, dt) for s in sig])
    xm = unscented_mean(sig_f, wm, angle_idx)
    d = _angle_residual(angle_idx)(sig_f, xm)
    Pm = (d * wc[:, None]).T @ d + Q
    return xm, 0.5 * (Pm + Pm.T)


def ukf_update_raw(x, P, z, hx: Callable, R, params: SigmaParams,
                   angle_idx: Sequence[int] = (), z_angle_idx: Sequence[int] = ()):
    """Measurement update. Returns (x, P, innovation, S)."""
    n = len(x)
    wm, wc, lam = params.weights(n)
    sig = sigma_points(x, P, lam, params.jitter)
    zs = np.array([hx(s) for s in sig])
    zm = unscented_mean(zs, wm, z_angle_idx)
    dz = _angle_residual(z_angle_idx)(zs, zm)
    dx = _angle_residual(angle_idx)(sig, x)
    S = (dz * wc[:, None]).T @ dz + R
    Pxz = (dx * wc[:, None]).T @ dz
    K = np.linalg.solve(S.T, Pxz.T).T
    y = _angle_residual(z_angle_idx)(np.asarray(z, dtype=float), zm)
    x_new = x + K @ y
    if angle_idx:
        x_new[list(angle_idx)] = (x_new[list(angle_idx)] + np.pi) % (2 * np.pi) - np.pi
    P_new = P - K @ S @ K.T
    P_new = 0.5 * (P_new + P_new.T)
    return x_new, P_new, y, S


# --- constant turn rate and velocity --------------------------------------

X, Y, YAW, V, YAW_RATE = range(5)


def ctrv_fx(s: np.ndarray, dt: float) -> np.ndarray:
    px, py, yaw, v, w = s
    if abs(w) > 1e-4:
        px2 = px + v / w * (math.sin(yaw + w * dt) - math.sin(yaw))
        py2 = py + v / w * (math.cos(yaw) - math.cos(yaw + w * dt))
    else:
        px2 = px + v * math.cos(yaw) * dt
        py2 = py + v * math.sin(yaw) * dt
    return np.array([px2, py2, yaw + w * dt, v, w])


def ctrv_process_noise(x: np.ndarray, dt: float, sigma_accel: float,
                       sigma_yaw_accel: float) -> np.ndarray:
    """Additive process noise from white longitudinal and yaw accelerations."""
    yaw = x[YAW]
    h = 0.5 * dt * dt
    G = np.array([
        [h * math.cos(yaw), 0.0],
        [h * math.sin(yaw), 0.0],
        [0.0, h],
        [dt, 0.0],
        [0.0, dt],
    ])
    return G @ np.diag([sigma_accel ** 2, sigma_yaw_accel ** 2]) @ G.T


def is_pd(P: np.ndarray) -> bool:
    if not np.allclose(P, P.T, atol=1e-9):
        return False
    try:
        np.linalg.cholesky(P)
        return True
    except np.linalg.LinAlgError:
        return False


def nis(innovation: np.ndarray, S: np.ndarray) -> float:
    return float(innovation @ np.linalg.solve(S, innovation))


def condition(P: np.ndarray, floor: Optional[float] = 1e-9) -> np.ndarray:
    """Symmetrise and clip eigenvalues from below."""
    P = 0.5 * (P + P.T)
    w, V = np.linalg.eigh(P)
    if w.min() >= floor:
        return P
    w = np.maximum(w, floor)
    return (V * w) @ V.T
