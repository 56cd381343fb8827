"""Mean-reverting diffusion engine.

Forward process: ``dx_t = theta_t (mu - x_t) dt + sigma_t dw_t`` with the
amplitude tied to the drift by ``sigma_t^2 = 2 lambda^2 theta_t``, so the
terminal state approaches N(mu, lambda^2). With unit step width the closed
forms are

    m_t = mu + (x0 - mu) exp(-theta_bar_t)
    v_t = lambda^2 (1 - exp(-2 theta_bar_t)),   theta_bar_t = sum_{i<=t} theta_i

Reverse process: ``dx_t = [theta_t (mu - x_t) - sigma_t^2 score] dt
+ sigma_t dw``, integrated backwards. The reverse-time Wiener increments are
realized as the per-step normal draws of :func:`reverse_sample`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .rng import Rng

TERMINAL_TOL = 1e-3  # exp(-theta_bar_T) must fall below this


@dataclass
class Schedule:
    """Per-step drift/noise schedule. theta[i-1] is the step-i coefficient."""

    T: int
    theta: np.ndarray
    sigma: np.ndarray
    lam: float
    theta_bar: np.ndarray  # length T+1, theta_bar[0] = 0

    def validate(self) -> "Schedule":
        if self.T < 1:
            raise ValueError("schedule needs T >= 1")
        if len(self.theta) != self.T or len(self.sigma) != self.T:
            raise ValueError("theta/sigma length must equal T")
        if np.any(self.theta <= 0):
            raise ValueError("all theta must be > 0")
        if not np.allclose(self.sigma**2, 2.0 * self.lam**2 * self.theta, rtol=1e-12):
            raise ValueError("sigma^2 must equal 2 lambda^2 theta")
        if len(self.theta_bar) != self.T + 1 or self.theta_bar[0] != 0.0:
            raise ValueError("theta_bar must have length T+1 and start at 0")
        if np.any(np.diff(self.theta_bar) <= 0):
            raise ValueError("theta_bar must be strictly increasing")
        tail = float(np.exp(-self.theta_bar[-1]))
        if tail > TERMINAL_TOL:
            raise ValueError(
                f"exp(-theta_bar_T) = {tail:.3g} > {TERMINAL_TOL}; "
                "increase theta or T so the terminal state is stationary"
            )
        return self


@dataclass
class DiffusionState:
    """Image state at a discrete diffusion time index."""

    x: np.ndarray
    t: int


def make_schedule(
    T: int,
    profile: str = "constant",
    lam: float = 0.5,
    theta: float | None = None,
    theta_lo: float | None = None,
    theta_hi: float | None = None,
) -> Schedule:
    """Build a schedule with sigma_i = sqrt(2 lambda^2 theta_i).

    ``constant`` uses ``theta`` (default 8/T, which lands exp(-theta_bar_T)
    at ~3.4e-4); ``linear`` interpolates theta from theta_lo to theta_hi.
    """
    if T < 1:
        raise ValueError("make_schedule needs T >= 1")
    if lam <= 0:
        raise ValueError("make_schedule needs lambda > 0")
    if profile == "constant":
        th = 8.0 / T if theta is None else float(theta)
        thetas = np.full(T, th, dtype=np.float64)
    elif profile == "linear":
        if theta_lo is None or theta_hi is None:
            raise ValueError("linear profile needs theta_lo and theta_hi")
        thetas = np.linspace(float(theta_lo), float(theta_hi), T, dtype=np.float64)
    else:
        raise ValueError(f"unknown theta profile {profile!r}")
    if np.any(thetas <= 0):
        raise ValueError("all theta must be > 0")
    sigmas = np.sqrt(2.0 * lam * lam * thetas)
    theta_bar = np.concatenate([[0.0], np.cumsum(thetas)])
    return Schedule(
        T=T, theta=thetas, sigma=sigmas, lam=float(lam), theta_bar=theta_bar
    ).validate()


def schedule_to_kv(sched: Schedule, profile: str = "constant") -> dict:
    kv = {"T": sched.T, "profile": profile, "lambda": sched.lam}
    if profile == "constant":
        kv["theta"] = float(sched.theta[0])
    else:
        kv["theta_lo"] = float(sched.theta[0])
        kv["theta_hi"] = float(sched.theta[-1])
    return kv


def schedule_from_kv(kv: dict) -> Schedule:
    profile = kv.get("profile", "constant")
    if profile == "constant":
        return make_schedule(
            int(kv["T"]), "constant", float(kv["lambda"]),
            theta=float(kv["theta"]) if "theta" in kv else None,
        )
    return make_schedule(
        int(kv["T"]), "linear", float(kv["lambda"]),
        theta_lo=float(kv["theta_lo"]), theta_hi=float(kv["theta_hi"]),
    )


def _check_t(sched: Schedule, t: int, t_min: int = 0) -> None:
    if not (t_min <= t <= sched.T):
        raise ValueError(f"t = {t} outside [{t_min}, {sched.T}]")


def forward_marginal(
    x0: np.ndarray, mu: np.ndarray, sched: Schedule, t: int
) -> tuple[np.ndarray, float]:
    """Closed-form mean image and (shared scalar) variance at step t."""
    _check_t(sched, t)
    if x0.shape != mu.shape:
        raise ValueError(f"shape mismatch: {x0.shape} vs {mu.shape}")
    tb = sched.theta_bar[t]
    decay = np.exp(-tb)
    m = mu + (np.asarray(x0, dtype=np.float64) - mu) * decay
    v = sched.lam**2 * (1.0 - np.exp(-2.0 * tb))
    return m, float(v)


def forward_sample(
    x0: np.ndarray, mu: np.ndarray, sched: Schedule, t: int, rng: Rng
) -> DiffusionState:
    """Draw x_t = m_t + sqrt(v_t) eps from the closed-form marginal."""
    m, v = forward_marginal(x0, mu, sched, t)
    eps = rng.standard_normal(m.shape)
    return DiffusionState(x=m + np.sqrt(v) * eps, t=t)


def forward_em(
    x0: np.ndarray, mu: np.ndarray, sched: Schedule, rng: Rng
) -> list[DiffusionState]:
    """Unit-step Euler-Maruyama trajectory of the forward process.

    Explicit steps with theta_i >= 2 are unstable and rejected; theta_i >= 1
    still contracts in distribution but overshoots the mean, so it is flagged.
    """
    if np.any(sched.theta >= 2.0):
        raise ValueError("forward_em is unstable for theta >= 2")
    if np.any(sched.theta >= 1.0):
        warnings.warn("theta >= 1 overshoots the drift target each step")
    x = np.asarray(x0, dtype=np.float64).copy()
    mu = np.asarray(mu, dtype=np.float64)
    traj = [DiffusionState(x=x.copy(), t=0)]
    for i in range(1, sched.T + 1):
        z = rng.standard_normal(x.shape)
        x = x + sched.theta[i - 1] * (mu - x) + sched.sigma[i - 1] * z
        traj.append(DiffusionState(x=x.copy(), t=i))
    return traj


def analytic_score(x0: np.ndarray, mu: np.ndarray, sched: Schedule):
    """Oracle score for a known target: grad log N(m_t, v_t) = -(x - m_t)/v_t.

    Exact when the data distribution is a point mass at x0, which is the
    regime used to validate the reverse sampler.
    """
    x0 = np.asarray(x0, dtype=np.float64)

    def score(x_t: np.ndarray, mu_arg: np.ndarray, t: int) -> np.ndarray:
        if t < 1:
            raise ValueError("analytic score undefined at t = 0 (zero variance)")
        m, v = forward_marginal(x0, mu_arg, sched, t)
        return -(np.asarray(x_t, dtype=np.float64) - m) / v

    return score


def score_from_noise(pred, sched: Schedule):
    """Wrap a noise predictor as a score: s = -eps_hat / sqrt(v_t)."""
    fn = pred.predict if hasattr(pred, "predict") else pred

    def score(x_t: np.ndarray, mu: np.ndarray, t: int) -> np.ndarray:
        if t < 1:
            raise ValueError("noise-predictor score undefined at t = 0")
        v = sched.lam**2 * (1.0 - np.exp(-2.0 * sched.theta_bar[t]))
        return -np.asarray(fn(x_t, mu, t), dtype=np.float64) / np.sqrt(v)

    return score


def reverse_time_grid(T: int, steps_used: int) -> list[int]:
    """Evenly spaced decreasing step indices T = t_S > ... > t_0 = 0."""
    if not (1 <= steps_used <= T):
        raise ValueError(f"steps_used must be in [1, {T}], got {steps_used}")
    return [int(round(k * T / steps_used)) for k in range(steps_used, -1, -1)]


def reverse_sample(
    x_T: np.ndarray,
    mu: np.ndarray,
    sched: Schedule,
    score,
    rng: Rng,
    steps_used: int | None = None,
) -> np.ndarray:
    """Integrate the reverse process from t=T down to t=0.

    When ``steps_used < T`` the step indices are an evenly spaced subset of
    {1..T}; per segment the drift is rescaled so the cumulative theta_bar is
    preserved, and sigma follows from sigma^2 = 2 lambda^2 theta. The final
    step is taken noise-free so the returned image is the drift-corrected
    mean.
    """
    steps_used = sched.T if steps_used is None else int(steps_used)
    grid = reverse_time_grid(sched.T, steps_used)
    x = np.asarray(x_T, dtype=np.float64).copy()
    mu = np.asarray(mu, dtype=np.float64)
    for k in range(len(grid) - 1):
        t_hi, t_lo = grid[k], grid[k + 1]
        delta = float(t_hi - t_lo)
        theta_eff = (sched.theta_bar[t_hi] - sched.theta_bar[t_lo]) / delta
        sigma2_eff = 2.0 * sched.lam**2 * theta_eff
        s = score(x, mu, t_hi)
        x = x - (theta_eff * (mu - x) - sigma2_eff * s) * delta
        if t_lo > 0:
            z = rng.standard_normal(x.shape)
            x = x + np.sqrt(sigma2_eff * delta) * z
        if not np.all(np.isfinite(x)):
            raise RuntimeError(f"reverse sampling diverged at step index {t_hi}")
    return x


def sample_terminal(mu: np.ndarray, sched: Schedule, rng: Rng) -> np.ndarray:
    """Draw the terminal state x_T ~ N(mu, lambda^2)."""
    mu = np.asarray(mu, dtype=np.float64)
    return mu + sched.lam * rng.standard_normal(mu.shape)
