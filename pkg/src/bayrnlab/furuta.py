"""Rotary (Furuta) pendulum simulator with a voltage-commanded servo arm.

State layout is ``[theta, alpha, theta_dot, alpha_dot]``: ``theta`` is the
rotary-arm angle and ``alpha`` the pendulum angle, both zero when the arm is
centered and the pendulum hangs straight down. The upright target is
``alpha = pi``. All functions broadcast over a leading batch axis, so a state
array of shape ``(n, 4)`` with array-valued parameters simulates ``n``
domain instances in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "FurutaParams",
    "FurutaEnv",
    "NumericBlowupError",
    "accel",
    "step",
    "reward",
    "observe",
    "initial_state",
    "mechanical_energy",
    "wrap_angle",
    "UPRIGHT_TARGET",
]

# Target state for the swing-up task: arm centered, pendulum upright.
UPRIGHT_TARGET = np.array([0.0, np.pi, 0.0, 0.0])


class NumericBlowupError(RuntimeError):
    """Raised when the integrator is fed a non-finite state."""


@dataclass(frozen=True)
class FurutaParams:
    """Physical constants of one Furuta pendulum instance.

    Masses, lengths, and motor constants must be strictly positive; the
    damping coefficients may be zero. Pole inertias default to the uniform
    rod value ``m * l**2 / 12`` about the center of mass and can be
    overridden explicitly. Fields accept equally-shaped numpy arrays to
    represent a whole batch of domain instances.
    """

    m_p: float = 0.024      # pendulum pole mass (kg)
    m_r: float = 0.095      # rotary pole mass (kg)
    l_p: float = 0.129      # pendulum pole length (m)
    l_r: float = 0.085      # rotary pole length (m)
    d_p: float = 2.0e-5     # pendulum viscous damping (N*m*s)
    d_r: float = 5.0e-4     # rotary viscous damping (N*m*s)
    k_m: float = 0.042      # motor back-EMF / torque constant (N*m/A)
    R_m: float = 8.4        # motor terminal resistance (ohm)
    g: float = 9.81         # gravity (m/s^2)
    j_p: float | np.ndarray | None = None   # override pendulum inertia (kg*m^2)
    j_r: float | np.ndarray | None = None   # override rotary inertia (kg*m^2)

    def __post_init__(self):
        for name in ("m_p", "m_r", "l_p", "l_r", "k_m", "R_m", "g"):
            if not np.all(np.asarray(getattr(self, name)) > 0):
                raise ValueError(f"FurutaParams.{name} must be strictly positive")
        for name in ("d_p", "d_r"):
            if not np.all(np.asarray(getattr(self, name)) >= 0):
                raise ValueError(f"FurutaParams.{name} must be non-negative")
        if self.j_p is None:
            object.__setattr__(self, "j_p", self.m_p * self.l_p**2 / 12.0)
        if self.j_r is None:
            object.__setattr__(self, "j_r", self.m_r * self.l_r**2 / 12.0)

    def with_values(self, values: dict) -> "FurutaParams":
        """Return a copy with the given fields replaced and inertias rederived."""
        updates = dict(values)
        if "j_p" not in updates and {"m_p", "l_p"} & set(updates):
            updates["j_p"] = None
        if "j_r" not in updates and {"m_r", "l_r"} & set(updates):
            updates["j_r"] = None
        return replace(self, **updates)

    @classmethod
    def stack(cls, params: list["FurutaParams"]) -> "FurutaParams":
        """Stack per-instance parameter sets into one array-valued set."""
        fields = ("m_p", "m_r", "l_p", "l_r", "d_p", "d_r", "k_m", "R_m", "g", "j_p", "j_r")
        stacked = {f: np.array([getattr(p, f) for p in params], dtype=float) for f in fields}
        return cls(**stacked)


def wrap_angle(x):
    """Wrap angles into [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2.0 * np.pi) - np.pi


def _mass_matrix(alpha, par: FurutaParams):
    ca = np.cos(alpha)
    m11 = par.j_r + par.m_p * par.l_r**2 + 0.25 * par.m_p * par.l_p**2 * ca**2
    m12 = 0.5 * par.m_p * par.l_p * par.l_r * ca
    m22 = par.j_p + 0.25 * par.m_p * par.l_p**2
    return m11, m12, m22


def accel(state, action, par: FurutaParams, a_max: float = 8.0):
    """Angular accelerations ``(theta_ddot, alpha_ddot)`` for one state.

    The action is a motor voltage, clamped to ``[-a_max, a_max]`` before the
    torque ``tau = k_m * (a - k_m * theta_dot) / R_m`` is applied. The 2x2
    mass-matrix system is solved in closed form. The velocity-product
    (Coriolis/centrifugal) terms are the Euler-Lagrange-consistent ones for
    this mass matrix, so the undamped, unforced flow conserves
    :func:`mechanical_energy`.
    """
    state = np.asarray(state, dtype=float)
    if not np.all(np.isfinite(state)):
        raise NumericBlowupError("numeric blow-up: non-finite state")
    theta_d = state[..., 2]
    alpha = state[..., 1]
    alpha_d = state[..., 3]
    sa, ca = np.sin(alpha), np.cos(alpha)

    a = np.clip(action, -a_max, a_max)
    tau = par.k_m * (a - par.k_m * theta_d) / par.R_m

    m11, m12, m22 = _mass_matrix(alpha, par)
    rhs1 = (tau
            + 0.5 * par.m_p * par.l_p**2 * sa * ca * theta_d * alpha_d
            + 0.5 * par.m_p * par.l_p * par.l_r * sa * alpha_d**2
            - par.d_r * theta_d)
    rhs2 = (-0.25 * par.m_p * par.l_p**2 * sa * ca * theta_d**2
            - 0.5 * par.m_p * par.l_p * par.g * sa
            - par.d_p * alpha_d)

    det = m11 * m22 - m12 * m12
    theta_dd = (m22 * rhs1 - m12 * rhs2) / det
    alpha_dd = (m11 * rhs2 - m12 * rhs1) / det
    return theta_dd, alpha_dd


def _deriv(state, action, par, a_max):
    theta_dd, alpha_dd = accel(state, action, par, a_max)
    return np.stack([state[..., 2], state[..., 3], theta_dd, alpha_dd], axis=-1)


def step(state, action, par: FurutaParams, dt: float, a_max: float = 8.0):
    """One classical RK4 step with the action held constant over ``dt``.

    Angles are left unwrapped; wrapping happens where errors are computed.
    ``dt = 0`` returns the state unchanged.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    state = np.asarray(state, dtype=float)
    if dt == 0:
        return state.copy()
    k1 = _deriv(state, action, par, a_max)
    k2 = _deriv(state + 0.5 * dt * k1, action, par, a_max)
    k3 = _deriv(state + 0.5 * dt * k2, action, par, a_max)
    k4 = _deriv(state + dt * k3, action, par, a_max)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def reward(state, action, q_diag, r_weight: float):
    """Exponentiated quadratic reward in (0, 1].

    The error is ``[0, pi, 0, 0] - state`` with the two angle components
    wrapped into [-pi, pi); velocities are left unwrapped. Returns 1 exactly
    at the upright rest state with zero action.
    """
    q = np.asarray(q_diag, dtype=float)
    if q.shape != (4,) or np.any(q < 0) or r_weight < 0:
        raise ValueError("q_diag must be four non-negative weights, r_weight >= 0")
    state = np.asarray(state, dtype=float)
    e = UPRIGHT_TARGET - state
    e_th = wrap_angle(e[..., 0])
    e_al = wrap_angle(e[..., 1])
    cost = (q[0] * e_th**2 + q[1] * e_al**2
            + q[2] * e[..., 2]**2 + q[3] * e[..., 3]**2
            + r_weight * np.asarray(action)**2)
    return np.exp(-cost)


def observe(state):
    """Map a state to the observation ``[sin t, cos t, sin a, cos a, td, ad]``."""
    state = np.asarray(state, dtype=float)
    theta, alpha = state[..., 0], state[..., 1]
    return np.stack([np.sin(theta), np.cos(theta), np.sin(alpha), np.cos(alpha),
                     state[..., 2], state[..., 3]], axis=-1)


def initial_state(rng: np.random.Generator, jitter_std: float = 0.0):
    """Start state: the hanging rest state plus optional Gaussian jitter."""
    return rng.normal(0.0, jitter_std, size=4) if jitter_std > 0 else np.zeros(4)


def mechanical_energy(state, par: FurutaParams):
    """Total mechanical energy, measured from the hanging rest minimum.

    Kinetic part is the quadratic form of the model's mass matrix; the
    potential is ``0.5 * m_p * l_p * g * (1 - cos alpha)``, zero at the
    hanging state and maximal upright.
    """
    state = np.asarray(state, dtype=float)
    alpha = state[..., 1]
    theta_d, alpha_d = state[..., 2], state[..., 3]
    m11, m12, m22 = _mass_matrix(alpha, par)
    kin = 0.5 * (m11 * theta_d**2 + 2.0 * m12 * theta_d * alpha_d + m22 * alpha_d**2)
    pot = 0.5 * par.m_p * par.l_p * par.g * (1.0 - np.cos(alpha))
    return kin + pot


class FurutaEnv:
    """Episode runner for the Furuta swing-up task.

    Rewards are dense (one per step); the per-rollout shaping penalty slot
    of the common environment interface is always zero here.
    """

    kind = "furuta"
    state_dim = 4

    def __init__(self, dt: float = 0.01, horizon: int = 600, a_max: float = 8.0,
                 q_diag=(0.2, 1.0, 0.02, 0.005), r_weight: float = 3e-3,
                 init_jitter_std: float = 0.0):
        if dt <= 0 or horizon < 1:
            raise ValueError("dt must be positive and horizon >= 1")
        self.dt = dt
        self.horizon = horizon
        self.a_max = a_max
        self.q_diag = np.asarray(q_diag, dtype=float)
        self.r_weight = float(r_weight)
        self.init_jitter_std = float(init_jitter_std)

    def make_params(self, values: dict) -> FurutaParams:
        return FurutaParams().with_values(values)

    def rollout_batch(self, policy, thetas, params_list, rngs, record: bool = False):
        """Simulate one episode per candidate, all candidates in lockstep.

        ``thetas`` has shape (n, d); ``params_list`` holds one FurutaParams
        per candidate; ``rngs`` one numpy Generator per candidate (consumed
        only at reset). Returns ``(rewards, shaping, states)`` with rewards
        of shape (horizon, n), shaping zeros of shape (n,), and states of
        shape (horizon + 1, n, 4) when ``record`` else None.
        """
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        n = thetas.shape[0]
        par = FurutaParams.stack(list(params_list))
        state = np.stack([initial_state(rng, self.init_jitter_std) for rng in rngs])

        rewards = np.empty((self.horizon, n))
        states = np.empty((self.horizon + 1, n, 4)) if record else None
        t_scale = 1.0 / self.horizon
        for t in range(self.horizon):
            if record:
                states[t] = state
            inp = t * t_scale if policy.input_kind == "time" else state
            a = np.clip(policy.act(inp, thetas), -self.a_max, self.a_max)
            rewards[t] = reward(state, a, self.q_diag, self.r_weight)
            state = step(state, a, par, self.dt, self.a_max)
        if record:
            states[self.horizon] = state
        return rewards, np.zeros(n), states
