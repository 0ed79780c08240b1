"""Parameterized low-dimensional policies for episodic search.

Two families: a time-indexed RBF readout (open-loop trajectory generator)
and a structured energy-pumping + linear-balance feedback law for the
pendulum swing-up. Policies are immutable; all learnable coefficients live
in a flat parameter vector ``theta`` so the same episodic optimizers apply
to both. ``act`` accepts a single ``theta`` of shape (d,) or a batch of
shape (n, d) and returns matching actions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .furuta import FurutaParams, mechanical_energy, wrap_angle

__all__ = ["RbfPolicy", "EnergyBalancePolicy", "perturb", "make_policy", "POLICY_KINDS"]


def perturb(theta, sigma: float, rng: np.random.Generator):
    """Return ``theta`` plus isotropic Gaussian exploration noise N(0, sigma^2 I)."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    theta = np.asarray(theta, dtype=float)
    return theta + sigma * rng.standard_normal(theta.shape)


@dataclass(frozen=True)
class RbfPolicy:
    """Normalized Gaussian RBF readout over normalized episode time.

    Basis centers are equispaced on [0, 1]; the shared bandwidth is set so
    adjacent bases intersect at activation 0.5 before normalization.
    Activations are normalized to sum to one, making the readout a convex
    combination of the weight entries. The readout is linear in ``theta``
    up to the final clamp.
    """

    n_basis: int = 16
    output_scale: float = 1.0   # action units per unit weight
    a_max: float = np.inf
    input_kind = "time"

    @property
    def dim(self) -> int:
        return self.n_basis

    @property
    def centers(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_basis)

    def basis(self, t_norm: float) -> np.ndarray:
        """Sum-normalized basis activations at normalized time ``t_norm``."""
        spacing = 1.0 / (self.n_basis - 1)
        sig2 = spacing**2 / (8.0 * np.log(2.0))   # midpoint activation = 0.5
        act = np.exp(-((t_norm - self.centers) ** 2) / (2.0 * sig2))
        return act / act.sum()

    def act(self, t_norm, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.dim:
            raise ValueError(f"theta has dimension {theta.shape[-1]}, expected {self.dim}")
        raw = theta @ self.basis(float(t_norm)) * self.output_scale
        return np.clip(raw, -self.a_max, self.a_max)


# Parameter slots of EnergyBalancePolicy.theta, in order:
#   k_e      energy-pumping gain (V/J)
#   e_ref    reference pendulum energy (J)
#   k_th, k_al, k_thd, k_ald   balance feedback gains on
#            [wrapped theta, wrapped (alpha - pi), theta_dot, alpha_dot]
ENERGY_BALANCE_DIM = 6


@dataclass(frozen=True)
class EnergyBalancePolicy:
    """Energy swing-up with a linear balance law near the upright position.

    Away from upright the action pumps the pendulum's mechanical energy
    toward a learned reference, using pseudo-energy evaluated with fixed
    nominal constants (the policy never sees the true domain parameters).
    Within ``switch_angle`` of upright a linear state-feedback takes over.
    The small ``pump_bias`` breaks the symmetry of the exact hanging rest
    state so the swing-up is self-starting.
    """

    switch_angle: float = 0.3       # rad from upright where balance engages
    a_max: float = 8.0
    pump_scale: float = 0.5         # rad/s scale of the smoothed pumping sign
    pump_bias: float = 0.3
    ref_params: FurutaParams = field(default_factory=FurutaParams)
    input_kind = "state"

    @property
    def dim(self) -> int:
        return ENERGY_BALANCE_DIM

    def pendulum_energy(self, state):
        """Pendulum-only pseudo-energy from the nominal reference constants."""
        state = np.asarray(state, dtype=float)
        pend_only = np.zeros_like(state)
        pend_only[..., 1] = state[..., 1]
        pend_only[..., 3] = state[..., 3]
        return mechanical_energy(pend_only, self.ref_params)

    def act(self, state, theta):
        state = np.asarray(state, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.dim:
            raise ValueError(f"theta has dimension {theta.shape[-1]}, expected {self.dim}")
        k_e, e_ref = theta[..., 0], theta[..., 1]
        gains = theta[..., 2:6]

        alpha, alpha_d = state[..., 1], state[..., 3]
        up_err = wrap_angle(alpha - np.pi)
        energy = self.pendulum_energy(state)
        direction = np.tanh(alpha_d * np.cos(alpha) / self.pump_scale + self.pump_bias)
        a_swing = k_e * (e_ref - energy) * direction

        err = np.stack([wrap_angle(state[..., 0]), up_err, state[..., 2], state[..., 3]], axis=-1)
        a_balance = np.sum(gains * err, axis=-1)

        a = np.where(np.abs(up_err) < self.switch_angle, a_balance, a_swing)
        return np.clip(a, -self.a_max, self.a_max)


POLICY_KINDS = {"rbf": RbfPolicy, "energy_balance": EnergyBalancePolicy}


def make_policy(kind: str, **kwargs):
    """Instantiate a policy by its kind tag."""
    if kind not in POLICY_KINDS:
        raise ValueError(f"unknown policy kind {kind!r}; known: {sorted(POLICY_KINDS)}")
    return POLICY_KINDS[kind](**kwargs)
