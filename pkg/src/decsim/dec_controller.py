"""One DEC control module per joint.

Each module runs a delayed servo on its controlled variable plus a gravity
compensation channel expressed as a CoM sway angle. Both signals pass
through the shared (Kp + Kd*d/dt) gain stage; an optional integral term
acts on the servo error only. The commanded torque traverses a transport
delay line standing in for all distributed loop latencies.

A disabled module (enable flag y = 0) regulates toward the reference value
captured at the instant of its disabling transition instead of the task
reference.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import math

from .model import JointParams
from .sensing import ControlledVariables

_DELAY_TOL = 1e-9


class DelayConfigError(ValueError):
    """Lumped delay is not an integer multiple of the controller period."""


@dataclass
class TorqueCommand:
    """Emitted joint torque with its pre-delay composition for debugging."""

    tau: float          # N*m, the delay-line output applied this tick
    servo_term: float   # pre-delay servo channel contribution
    gravity_term: float  # pre-delay gravity channel contribution
    pre_delay: float    # servo_term + gravity_term, the value pushed this tick


@dataclass
class DecModuleState:
    """Mutable state of one control module."""

    module_id: str
    gains: JointParams
    dt: float                      # controller sample period, s
    alpha_ref: float = 0.0         # task reference
    y: int = 1                     # enable flag
    alpha_ref_held: float = 0.0    # reference captured at disabling
    integ: float = 0.0             # servo integral state, rad*s
    delay_line: deque = field(init=False)
    delay_steps: int = field(init=False)
    _prev_servo: float | None = field(default=None, init=False)
    _prev_grav: float | None = field(default=None, init=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        steps = self.gains.lumped_delay / self.dt
        if abs(steps - round(steps)) > _DELAY_TOL:
            raise DelayConfigError(
                f"{self.module_id}: lumped delay {self.gains.lumped_delay} s is not an "
                f"integer multiple of dt = {self.dt} s"
            )
        self.delay_steps = int(round(steps))
        self.delay_line = deque([0.0] * self.delay_steps, maxlen=self.delay_steps + 1)


def compute_error(state: DecModuleState, alpha: float) -> float:
    """Servo error against the task reference (enabled) or held reference."""
    ref = state.alpha_ref if state.y == 1 else state.alpha_ref_held
    return alpha - ref


def set_enabled(state: DecModuleState, y_new: int, alpha_now: float) -> DecModuleState:
    """Apply an enable/disable decision; captures the hold point on 1 -> 0.

    The integral state is cleared on every actual transition to avoid
    windup carrying across hold segments.
    """
    if y_new not in (0, 1):
        raise ValueError("y must be 0 or 1")
    if y_new == state.y:
        return state
    if y_new == 0:
        state.alpha_ref_held = alpha_now
    state.integ = 0.0
    state.y = y_new
    return state


def control_tick(
    state: DecModuleState, meas: ControlledVariables, dt: float
) -> tuple[DecModuleState, TorqueCommand]:
    """Advance the controller by one sample and emit the delayed torque.

    Channel signals: servo = G_servo * error, gravity = G_g * alpha_com.
    Each channel passes through Kp + Kd * (backward difference) and the
    integral gain acts on the servo error alone. The derivative is taken on
    the measured signal (references are piecewise constant, so this equals
    the error derivative everywhere except at enable/disable switches,
    where it avoids the reference kick). The total is negated so the torque
    opposes the error, then pushed through the delay line.
    """
    g = state.gains
    if abs(dt - state.dt) > _DELAY_TOL:
        raise DelayConfigError(
            f"{state.module_id}: tick dt {dt} does not match configured period {state.dt}"
        )
    eps = compute_error(state, meas.alpha)
    servo_sig = g.G_servo * eps
    grav_sig = g.G_g * meas.alpha_com
    servo_meas = g.G_servo * meas.alpha
    d_servo = 0.0 if state._prev_servo is None else (servo_meas - state._prev_servo) / dt
    d_grav = 0.0 if state._prev_grav is None else (grav_sig - state._prev_grav) / dt
    state.integ += eps * dt
    servo_term = -(g.Kp * servo_sig + g.Kd * d_servo + g.Ki * state.integ)
    gravity_term = -(g.Kp * grav_sig + g.Kd * d_grav)
    pre = servo_term + gravity_term
    if not math.isfinite(pre):
        raise ValueError(f"{state.module_id}: non-finite torque command")
    if state.delay_steps > 0:
        state.delay_line.append(pre)
        tau = state.delay_line.popleft()
    else:
        tau = pre
    state._prev_servo = servo_meas
    state._prev_grav = grav_sig
    return state, TorqueCommand(
        tau=tau, servo_term=servo_term, gravity_term=gravity_term, pre_delay=pre
    )


def module_weight(state: DecModuleState, meas: ControlledVariables) -> float:
    """Arbitration weight: absolute error on the task reference.

    Uses the task reference regardless of the enable flag, so a held module
    still reports how badly it needs to move.
    """
    return abs(meas.alpha - state.alpha_ref)
