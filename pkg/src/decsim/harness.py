"""Scenario orchestration, transient metrics, and trajectory logging.

The tick loop interleaves, at every controller/integration step:
down-channel sensing (hip -> knee -> ankle over the message bus), the
consensus round at arbitration-slot boundaries (distributed mode only),
one controller tick per module, and one RK4 plant step. Samples are
decimated to the configured log rate; metrics summarize the transient of
the three controlled variables plus the mechanical energy spent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dec_controller as dc
from . import dynamics, sensing
from .config import ScenarioConfig
from .consensus import ConsensusRound, TieBreakRule, arbitration_schedule, initial_enabling, run_round
from .dynamics import JointTorques, PlantState
from .netsim import MessageBus, chain_topology

MODULE_ORDER = ("ankle", "knee", "hip")


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    q: np.ndarray
    qdot: np.ndarray
    SS: float
    THS: float
    TS: float
    KNEE: float
    BS: float
    com_xy: np.ndarray
    tau: np.ndarray
    enabled: str           # winner module id, or "all"
    weights: np.ndarray    # (ankle, knee, hip)


@dataclass(frozen=True)
class VariableMetrics:
    overshoot_deg: float
    rise_time: float
    settling_time: float


@dataclass(frozen=True)
class MetricsReport:
    variables: dict[str, VariableMetrics]  # keys: TS, KNEE, BS
    energy: float

    def as_text(self) -> str:
        lines = []
        for name in ("TS", "KNEE", "BS"):
            m = self.variables[name]
            lines.append(f"{name}.overshoot_deg = {m.overshoot_deg!r}")
            lines.append(f"{name}.rise_time = {m.rise_time!r}")
            lines.append(f"{name}.settling_time = {m.settling_time!r}")
        lines.append(f"energy = {self.energy!r}")
        return "\n".join(lines) + "\n"


@dataclass
class HoldEvent:
    """A module's 1 -> 0 transition with the captured reference."""

    t: float
    module: str
    alpha_held: float


@dataclass
class ModuleSnapshot:
    """Per-logged-sample controller internals, for audits."""

    y: dict[str, int]
    alpha_ref_held: dict[str, float]


@dataclass
class SimResult:
    samples: list[TrajectorySample]
    metrics: MetricsReport
    bus: MessageBus
    rounds: list[ConsensusRound]
    hold_events: list[HoldEvent]
    module_snapshots: list[ModuleSnapshot]
    config: ScenarioConfig


# ---------------------------------------------------------------------------
# metrics


def metric_overshoot(series, ref: float) -> float:
    """Max excursion beyond ref opposite the initial error, in degrees."""
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise ValueError("empty series")
    dev = s - ref
    nonzero = dev[dev != 0.0]
    if nonzero.size == 0:
        return 0.0
    direction = math.copysign(1.0, nonzero[0])
    overshoot = max(0.0, float(np.max(-direction * dev)))
    return math.degrees(overshoot)


def metric_rise_time(times, series, ref: float) -> float:
    """Time to traverse from 10% to 90% of the initial gap to ref.

    Returns the last sample time when the 90% level is never reached.
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(series, dtype=float)
    gap = s[0] - ref
    if gap == 0.0:
        raise ValueError("initial value equals the reference")
    progress = 1.0 - (s - ref) / gap
    idx10 = np.argmax(progress >= 0.1)
    idx90 = np.argmax(progress >= 0.9)
    if progress[idx90] < 0.9:
        return float(t[-1])
    if progress[idx10] < 0.1:  # cannot happen when 90% reached, defensive
        return float(t[-1])
    return float(t[idx90] - t[idx10])


def metric_settling_time(times, series, ref: float, band: float) -> float:
    """Earliest time after which |series - ref| stays within band until the end."""
    t = np.asarray(times, dtype=float)
    s = np.asarray(series, dtype=float)
    outside = np.abs(s - ref) > band
    if not outside.any():
        return 0.0
    last = int(np.max(np.nonzero(outside)))
    if last == len(s) - 1:
        return float(t[-1])
    return float(t[last + 1])


def metric_energy(tau_series, qdot_series, dt: float, signed: bool = False) -> float:
    """Integral of joint mechanical power by the trapezoidal rule (J).

    Power is summed as |tau * qdot| per joint by default (actuators cannot
    recover negative work); ``signed`` switches to the net-work variant.
    """
    tau = np.atleast_2d(np.asarray(tau_series, dtype=float))
    qd = np.atleast_2d(np.asarray(qdot_series, dtype=float))
    if tau.shape != qd.shape:
        raise ValueError("tau and qdot series must be aligned")
    power = tau * qd
    if not signed:
        power = np.abs(power)
    trapz = getattr(np, "trapezoid", np.trapz)
    return float(trapz(power.sum(axis=-1), dx=dt))


# ---------------------------------------------------------------------------
# CoM path geometry (transient-shape analysis)


def chord_offsets(points) -> np.ndarray:
    """Signed perpendicular distances of path points from the start-end chord."""
    p = np.asarray(points, dtype=float)
    chord = p[-1] - p[0]
    norm = float(np.hypot(*chord))
    if norm == 0.0:
        return np.linalg.norm(p - p[0], axis=1)
    rel = p - p[0]
    return (rel[:, 0] * chord[1] - rel[:, 1] * chord[0]) / norm


def chord_deviation(points) -> float:
    """Maximum unsigned deviation of a path from its start-end chord."""
    return float(np.max(np.abs(chord_offsets(points))))


def path_crosses_chord(points, tol: float = 0.0) -> bool:
    """True when the path loops across its own chord (offsets of both signs)."""
    off = chord_offsets(points)
    return bool((off > tol).any() and (off < -tol).any())


def slot_chord_deviations(samples: list[TrajectorySample], T_e: float) -> list[float]:
    """Max chord deviation of the CoM path within each arbitration slot."""
    by_slot: dict[int, list[np.ndarray]] = {}
    for s in samples:
        by_slot.setdefault(arbitration_schedule(s.t, T_e), []).append(s.com_xy)
    out = []
    for k in sorted(by_slot):
        pts = by_slot[k]
        if len(pts) >= 2:
            out.append(chord_deviation(np.vstack(pts)))
    return out


# ---------------------------------------------------------------------------
# simulation


def _make_sample(plant, model, tau, enabled, weights) -> TrajectorySample:
    ang = sensing.segment_angles(plant)
    com = dynamics.com_position(model, plant.q)
    bs = math.atan2(com[0], com[1])
    return TrajectorySample(
        t=plant.t,
        q=plant.q.copy(),
        qdot=plant.qdot.copy(),
        SS=ang.SS,
        THS=ang.THS,
        TS=ang.TS,
        KNEE=float(plant.q[1]),
        BS=bs,
        com_xy=com,
        tau=np.asarray(tau, dtype=float).copy(),
        enabled=enabled,
        weights=np.asarray(weights, dtype=float).copy(),
    )


def simulate(config: ScenarioConfig) -> SimResult:
    """Run one scenario and return the full result record."""
    model = config.body
    dt = config.dt
    n_ticks = int(round(config.duration / dt))
    log_every = max(1, int(round(1.0 / (config.log_rate * dt))))

    plant = PlantState(q=np.array(config.q0, dtype=float), qdot=np.zeros(3), t=0.0)
    topo = chain_topology(MODULE_ORDER)
    bus = MessageBus(topo)
    neighbors = {m: topo.neighbors_of(m) for m in MODULE_ORDER}
    refs = dict(zip(MODULE_ORDER, config.references))
    modules = {
        m: dc.DecModuleState(module_id=m, gains=model.joint(m), dt=dt, alpha_ref=refs[m])
        for m in MODULE_ORDER
    }
    for m, y in initial_enabling(MODULE_ORDER).items():
        modules[m].y = y
    tie_break = TieBreakRule()

    samples: list[TrajectorySample] = []
    snapshots: list[ModuleSnapshot] = []
    rounds: list[ConsensusRound] = []
    hold_events: list[HoldEvent] = []
    tau_hist = np.empty((n_ticks, 3))
    qdot_hist = np.empty((n_ticks, 3))
    enabled_label = "all"
    next_round_k = 1

    for n in range(n_ticks):
        t = n * dt

        # 1. sensing + down-channel pass, top-down over the bus
        hip_msg = sensing.build_down_channel(plant, model, "hip")
        bus.send("hip", "knee", "down_channel", hip_msg, n)
        recv_knee = [e.payload for e in bus.deliver(n) if e.payload_tag == "down_channel"]
        knee_msg = sensing.build_down_channel(plant, model, "knee", recv_knee[0])
        bus.send("knee", "ankle", "down_channel", knee_msg, n)
        recv_ankle = [e.payload for e in bus.deliver(n) if e.payload_tag == "down_channel"]
        meas = {
            "hip": sensing.controlled_variables("hip", plant, model),
            "knee": sensing.controlled_variables("knee", plant, model, hip_msg),
            "ankle": sensing.controlled_variables("ankle", plant, model, recv_ankle[0]),
        }
        weights = {m: dc.module_weight(modules[m], meas[m]) for m in MODULE_ORDER}

        # 2. arbitration at slot boundaries
        if config.mode == "distributed" and t >= next_round_k * config.T_e - 1e-12:
            rnd = run_round(
                next_round_k, weights, neighbors, tie_break, bus=bus, tick=n
            )
            for m in MODULE_ORDER:
                if modules[m].y == 1 and rnd.y[m] == 0:
                    hold_events.append(HoldEvent(t=t, module=m, alpha_held=meas[m].alpha))
                dc.set_enabled(modules[m], rnd.y[m], meas[m].alpha)
            rounds.append(rnd)
            enabled_label = rnd.winner
            next_round_k += 1

        # 3. control ticks
        tau = np.empty(3)
        for i, m in enumerate(MODULE_ORDER):
            _, cmd = dc.control_tick(modules[m], meas[m], dt)
            tau[i] = cmd.tau

        tau_hist[n] = tau
        qdot_hist[n] = plant.qdot

        # 4. logging (pre-step state with the torque applied over this tick)
        if n % log_every == 0:
            samples.append(
                _make_sample(plant, model, tau, enabled_label,
                             [weights[m] for m in MODULE_ORDER])
            )
            snapshots.append(
                ModuleSnapshot(
                    y={m: modules[m].y for m in MODULE_ORDER},
                    alpha_ref_held={m: modules[m].alpha_ref_held for m in MODULE_ORDER},
                )
            )

        # 5. plant integration
        plant = dynamics.step(model, plant, JointTorques(tau), dt)

    times = np.array([s.t for s in samples])
    band = math.radians(config.settling_band_deg)
    variables = {}
    for name, ref in (("TS", refs["hip"]), ("KNEE", refs["knee"]), ("BS", refs["ankle"])):
        series = np.array([getattr(s, name) for s in samples])
        rise = (
            metric_rise_time(times, series, ref)
            if series[0] != ref
            else 0.0
        )
        variables[name] = VariableMetrics(
            overshoot_deg=metric_overshoot(series, ref),
            rise_time=rise,
            settling_time=metric_settling_time(times, series, ref, band),
        )
    energy = metric_energy(tau_hist, qdot_hist, dt, signed=config.energy_signed)
    metrics = MetricsReport(variables=variables, energy=energy)
    return SimResult(
        samples=samples,
        metrics=metrics,
        bus=bus,
        rounds=rounds,
        hold_events=hold_events,
        module_snapshots=snapshots,
        config=config,
    )


def run_scenario(config: ScenarioConfig) -> tuple[list[TrajectorySample], MetricsReport]:
    """Run one scenario; returns the trajectory log and the metrics summary."""
    result = simulate(config)
    return result.samples, result.metrics


# ---------------------------------------------------------------------------
# output files

CSV_COLUMNS = (
    "t,q1,q2,q3,qdot1,qdot2,qdot3,SS,THS,TS,KNEE,BS,"
    "com_x,com_y,tau1,tau2,tau3,enabled,w1,w2,w3"
)


def trajectory_csv(samples: list[TrajectorySample], header_lines: list[str] | None = None) -> str:
    """Render samples as CSV, optionally preceded by '#' comment lines."""
    out = []
    for line in header_lines or []:
        out.append(f"# {line}")
    out.append(CSV_COLUMNS)
    for s in samples:
        fields = (
            [repr(float(s.t))]
            + [repr(float(v)) for v in s.q]
            + [repr(float(v)) for v in s.qdot]
            + [repr(float(v)) for v in (s.SS, s.THS, s.TS, s.KNEE, s.BS)]
            + [repr(float(v)) for v in s.com_xy]
            + [repr(float(v)) for v in s.tau]
            + [s.enabled]
            + [repr(float(v)) for v in s.weights]
        )
        out.append(",".join(fields))
    return "\n".join(out) + "\n"
