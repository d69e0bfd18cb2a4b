"""Deterministic gesture kernels over timestamped controller event streams.

Every machine is a pure fold: the same trace always yields the same command
sequence, which makes byte-exact golden-trace regression tests possible.
Commands serialize one per line with repr-exact floats.

Conventions: controller/head forward is the local -z axis; rotation uses an
allocentric (model-centered) frame; thresholds live in GestureConfig and are
contractual for the golden traces.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import quat
from .errors import (CoincidentWithCenter, EmptyCarousel,
                     InsufficientSamples, PairingViolation)

DEVICES = ("left", "right", "head")
KINDS = ("press", "release", "move")
BUTTONS = ("trigger", "trackpad", "menu", "lateral", "none")

FORWARD_LOCAL = np.array([0.0, 0.0, -1.0])


@dataclass(frozen=True)
class GestureConfig:
    v_slide: float = 0.4          # m/s, translation slide threshold
    v_throw: float = 1.5          # m/s, throw-away threshold
    t_single: float = 0.3         # s, single vs group selection boundary
    omega_slide: float = 1.0      # rad/s, rotation slide threshold
    velocity_window: int = 5      # samples for velocity estimates
    decision_window: float = 0.1  # s, translation velocity lookahead
    despawn_time: float = 0.5     # s, throw-away animation length
    min_scale_distance: float = 0.01   # m, ignore scale gestures tighter


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    orientation: np.ndarray       # unit quaternion (w, x, y, z)

    def __post_init__(self):
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=float).reshape(3))
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ValueError(f"pose orientation is not unit: {q}")
        object.__setattr__(self, "orientation", q)

    def forward(self) -> np.ndarray:
        return quat.rotate_vector(self.orientation, FORWARD_LOCAL)


@dataclass(frozen=True)
class ControllerEvent:
    timestamp: float
    device: str
    kind: str                     # press | release | move
    button: str                   # trigger | trackpad | menu | lateral | none
    pose: Pose


# --- commands -----------------------------------------------------------------

def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.atleast_1d(values))


@dataclass(frozen=True)
class Translate:
    delta: np.ndarray

    def to_line(self):
        return f"translate {_fmt(self.delta)}"


@dataclass(frozen=True)
class TranslateSlide:
    velocity: np.ndarray

    def to_line(self):
        return f"translate-slide {_fmt(self.velocity)}"


@dataclass(frozen=True)
class Rotate:
    quaternion: np.ndarray

    def to_line(self):
        return f"rotate {_fmt(self.quaternion)}"


@dataclass(frozen=True)
class Scale:
    factor: float

    def to_line(self):
        return f"scale {self.factor!r}"


@dataclass(frozen=True)
class SelectSingle:
    origin: np.ndarray
    direction: np.ndarray

    def to_line(self):
        return f"select-single {_fmt(self.origin)} {_fmt(self.direction)}"


@dataclass(frozen=True)
class BeginVolume:
    anchor: np.ndarray

    def to_line(self):
        return f"begin-volume {_fmt(self.anchor)}"


@dataclass(frozen=True)
class UpdateVolume:
    corner: np.ndarray

    def to_line(self):
        return f"update-volume {_fmt(self.corner)}"


@dataclass(frozen=True)
class CommitVolume:
    def to_line(self):
        return "commit-volume"


@dataclass(frozen=True)
class DeleteVolume:
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray

    def to_line(self):
        return (f"delete-volume {_fmt(self.linear_velocity)} "
                f"{_fmt(self.angular_velocity)}")


@dataclass(frozen=True)
class CarouselNext:
    def to_line(self):
        return "carousel-next"


@dataclass(frozen=True)
class CarouselSelect:
    item: str

    def to_line(self):
        return f"carousel-select {self.item}"


def format_commands(commands) -> str:
    return "".join(c.to_line() + "\n" for c in commands)


# --- trace IO -------------------------------------------------------------------

def format_trace(events) -> str:
    lines = []
    for e in events:
        lines.append(f"{e.timestamp!r} {e.device} {e.kind} {e.button} "
                     f"{_fmt(e.pose.position)} {_fmt(e.pose.orientation)}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> list[ControllerEvent]:
    """Parse and validate a line-delimited event trace.

    Rejects non-monotone per-device timestamps and press/release pairing
    violations instead of reordering silently.
    """
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 11:
            raise ValueError(f"trace line {lineno}: expected 11 fields, "
                             f"got {len(parts)}")
        t = float(parts[0])
        device, kind, button = parts[1], parts[2], parts[3]
        if device not in DEVICES:
            raise ValueError(f"trace line {lineno}: unknown device {device!r}")
        if kind not in KINDS:
            raise ValueError(f"trace line {lineno}: unknown kind {kind!r}")
        if button not in BUTTONS:
            raise ValueError(f"trace line {lineno}: unknown button {button!r}")
        pose = Pose(position=[float(v) for v in parts[4:7]],
                    orientation=[float(v) for v in parts[7:11]])
        events.append(ControllerEvent(t, device, kind, button, pose))
    validate_events(events)
    return events


def validate_events(events):
    last_time: dict[str, float] = {}
    held: set[tuple[str, str]] = set()
    for e in events:
        if e.device in last_time and e.timestamp <= last_time[e.device]:
            raise PairingViolation(
                f"timestamps not strictly increasing on {e.device} "
                f"at t={e.timestamp}")
        last_time[e.device] = e.timestamp
        key = (e.device, e.button)
        if e.kind == "press":
            if key in held:
                raise PairingViolation(f"double press of {key} "
                                       f"at t={e.timestamp}")
            held.add(key)
        elif e.kind == "release":
            if key not in held:
                raise PairingViolation(f"release without press of {key} "
                                       f"at t={e.timestamp}")
            held.discard(key)
    return events


# --- kernels -------------------------------------------------------------------

def arcball_rotation(p0, p1, center) -> np.ndarray:
    """Quaternion rotating direction (p0 - center) onto (p1 - center).

    Axis is the normalized cross product of the two unit directions, angle
    the arccosine of their dot product. Antiparallel inputs rotate by pi
    around the first of {x, y} not parallel to the start direction, crossed
    with it.
    """
    c = np.asarray(center, dtype=float)
    v0 = np.asarray(p0, dtype=float) - c
    v1 = np.asarray(p1, dtype=float) - c
    n0, n1 = np.linalg.norm(v0), np.linalg.norm(v1)
    if n0 < 1e-12 or n1 < 1e-12:
        raise CoincidentWithCenter("arcball endpoint coincides with center")
    v0, v1 = v0 / n0, v1 / n1
    dot = float(np.clip(v0 @ v1, -1.0, 1.0))
    axis = np.cross(v0, v1)
    norm_axis = np.linalg.norm(axis)
    if norm_axis < 1e-12:
        if dot > 0.0:
            return quat.identity()
        for candidate in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0])):
            fallback = np.cross(candidate, v0)
            if np.linalg.norm(fallback) > 1e-9:
                return quat.from_axis_angle(
                    fallback / np.linalg.norm(fallback), math.pi)
    return quat.from_axis_angle(axis / norm_axis, math.acos(dot))


def estimate_velocity(samples, window: int = 5) -> np.ndarray:
    """Least-squares linear velocity over the last `window` samples.

    Samples are (timestamp, position) pairs or objects with .timestamp and
    .pose.position.
    """
    pairs = []
    for s in samples:
        if hasattr(s, "pose"):
            pairs.append((float(s.timestamp), np.asarray(s.pose.position)))
        else:
            t, p = s
            pairs.append((float(t), np.asarray(p, dtype=float)))
    pairs = pairs[-window:]
    if len(pairs) < 2:
        raise InsufficientSamples(f"need 2 samples, got {len(pairs)}")
    times = np.array([t for t, _ in pairs])
    positions = np.array([p for _, p in pairs])
    dt = times - times.mean()
    denom = float((dt ** 2).sum())
    if denom == 0.0:
        raise InsufficientSamples("all samples share one timestamp")
    return (dt @ (positions - positions.mean(axis=0))) / denom


def despawn_position(position, linear_velocity, t: float) -> np.ndarray:
    """Throw-away animation kinematics: straight-line coasting."""
    return (np.asarray(position, dtype=float)
            + np.asarray(linear_velocity, dtype=float) * t)


# --- state machines --------------------------------------------------------------

def translation_machine(events, cfg: GestureConfig = GestureConfig(),
                        device: str = "right"):
    """Right-trackpad drag: slide once if the initial motion is fast,
    otherwise per-move deltas."""
    commands = []
    samples = None        # [(t, position)] while held
    mode = None           # None | "pending" | "drag" | "slide"
    for e in events:
        if e.device != device:
            continue
        if e.kind == "press" and e.button == "trackpad":
            samples = [(e.timestamp, e.pose.position)]
            mode = "pending"
            continue
        if mode is None or samples is None:
            continue
        ended = e.kind == "release" and e.button == "trackpad"
        if e.kind == "move":
            samples.append((e.timestamp, e.pose.position))
        if mode == "pending":
            deadline = samples[0][0] + cfg.decision_window
            if e.timestamp >= deadline or ended:
                window = [s for s in samples if s[0] <= deadline]
                speed = 0.0
                velocity = None
                if len(window) >= 2:
                    velocity = estimate_velocity(window,
                                                 window=len(window))
                    speed = float(np.linalg.norm(velocity))
                if speed > cfg.v_slide:
                    mode = "slide"
                    commands.append(TranslateSlide(velocity=velocity))
                else:
                    mode = "drag"
                    for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
                        commands.append(Translate(delta=p1 - p0))
        elif mode == "drag" and e.kind == "move":
            commands.append(Translate(delta=samples[-1][1] - samples[-2][1]))
        if ended:
            samples = None
            mode = None
    return commands


def _angular_rate(samples, center, window):
    """(axis, rad/s) of controller direction sweep around the center."""
    pts = samples[-window:]
    if len(pts) < 2:
        return None, 0.0
    (t0, p0), (t1, p1) = pts[0], pts[-1]
    if t1 <= t0:
        return None, 0.0
    v0 = p0 - center
    v1 = p1 - center
    if np.linalg.norm(v0) < 1e-12 or np.linalg.norm(v1) < 1e-12:
        return None, 0.0
    v0 = v0 / np.linalg.norm(v0)
    v1 = v1 / np.linalg.norm(v1)
    axis = np.cross(v0, v1)
    norm_axis = np.linalg.norm(axis)
    if norm_axis < 1e-12:
        return None, 0.0
    angle = math.acos(float(np.clip(v0 @ v1, -1.0, 1.0)))
    return axis / norm_axis, angle / (t1 - t0)


def rotation_machine(events, center, cfg: GestureConfig = GestureConfig(),
                     device: str = "left"):
    """Arcball rotation from press to release, with an inertial slide when
    the hand is still sweeping at release."""
    center = np.asarray(center, dtype=float)
    commands = []
    press_position = None
    samples = []
    slide = None          # (axis, omega, last_emit_time)
    for e in events:
        if slide is not None:
            if e.device == device and e.kind == "press" \
                    and e.button == "trackpad":
                slide = None          # stop command; fall through to press
            else:
                axis, omega, last = slide
                dt = e.timestamp - last
                if dt > 0:
                    commands.append(Rotate(
                        quaternion=quat.from_axis_angle(axis, omega * dt)))
                    slide = (axis, omega, e.timestamp)
                continue
        if e.device != device:
            continue
        if e.kind == "press" and e.button == "trackpad":
            press_position = e.pose.position
            samples = [(e.timestamp, e.pose.position)]
        elif press_position is not None and e.kind == "move":
            samples.append((e.timestamp, e.pose.position))
        elif press_position is not None and e.kind == "release" \
                and e.button == "trackpad":
            samples.append((e.timestamp, e.pose.position))
            commands.append(Rotate(quaternion=arcball_rotation(
                press_position, e.pose.position, center)))
            axis, omega = _angular_rate(samples, center,
                                        cfg.velocity_window)
            if axis is not None and omega > cfg.omega_slide:
                slide = (axis, omega, e.timestamp)
            press_position = None
            samples = []
    return commands


def scale_machine(events, cfg: GestureConfig = GestureConfig()):
    """Bimanual scaling: factor = inter-controller distance over the distance
    at gesture start; gestures starting closer than 1 cm are ignored."""
    commands = []
    held = {"left": False, "right": False}
    position = {"left": None, "right": None}
    start_distance = None
    for e in events:
        if e.device not in ("left", "right"):
            continue
        position[e.device] = e.pose.position
        if e.kind == "press" and e.button == "trackpad":
            held[e.device] = True
            if held["left"] and held["right"]:
                if position["left"] is None or position["right"] is None:
                    continue
                d = float(np.linalg.norm(position["left"]
                                         - position["right"]))
                start_distance = d if d > cfg.min_scale_distance else None
        elif e.kind == "release" and e.button == "trackpad":
            held[e.device] = False
            start_distance = None
        elif e.kind == "move" and start_distance is not None \
                and held["left"] and held["right"]:
            d = float(np.linalg.norm(position["left"] - position["right"]))
            commands.append(Scale(factor=d / start_distance))
    return commands


def selection_machine(events, cfg: GestureConfig = GestureConfig()):
    """Trigger press duration dispatch: quick release picks a single cell,
    holding t_single or longer grows a selection volume until release."""
    commands = []
    pending = {}          # device -> (press_time, press_position)
    in_group = set()
    for e in events:
        if e.device not in ("left", "right"):
            continue
        if e.kind == "press" and e.button == "trigger":
            pending[e.device] = (e.timestamp, e.pose.position)
            continue
        if e.device in pending:
            t0, anchor = pending[e.device]
            crossed = e.timestamp - t0 >= cfg.t_single
            if e.device not in in_group and crossed:
                commands.append(BeginVolume(anchor=anchor))
                in_group.add(e.device)
                if e.kind == "move":
                    commands.append(UpdateVolume(corner=e.pose.position))
                    continue
            elif e.device in in_group and e.kind == "move":
                commands.append(UpdateVolume(corner=e.pose.position))
                continue
            if e.kind == "release" and e.button == "trigger":
                if e.device in in_group:
                    commands.append(CommitVolume())
                    in_group.discard(e.device)
                else:
                    commands.append(SelectSingle(
                        origin=e.pose.position,
                        direction=e.pose.forward()))
                del pending[e.device]
    return commands


def throw_machine(events, cfg: GestureConfig = GestureConfig(),
                  device: str = "right"):
    """Grab (trackpad) + release: fast releases delete the grabbed volume
    with the hand's linear and angular momentum."""
    commands = []
    samples = None
    orientations = None
    for e in events:
        if e.device != device:
            continue
        if e.kind == "press" and e.button == "trackpad":
            samples = [(e.timestamp, e.pose.position)]
            orientations = [(e.timestamp, e.pose.orientation)]
        elif samples is not None and e.kind == "move":
            samples.append((e.timestamp, e.pose.position))
            orientations.append((e.timestamp, e.pose.orientation))
        elif samples is not None and e.kind == "release" \
                and e.button == "trackpad":
            samples.append((e.timestamp, e.pose.position))
            orientations.append((e.timestamp, e.pose.orientation))
            try:
                velocity = estimate_velocity(samples, cfg.velocity_window)
            except InsufficientSamples:
                velocity = np.zeros(3)
            if float(np.linalg.norm(velocity)) > cfg.v_throw:
                commands.append(DeleteVolume(
                    linear_velocity=velocity,
                    angular_velocity=_finite_difference_omega(orientations)))
            samples = None
            orientations = None
    return commands


def _finite_difference_omega(orientations):
    if len(orientations) < 2:
        return np.zeros(3)
    (t0, q0), (t1, q1) = orientations[-2], orientations[-1]
    if t1 <= t0:
        return np.zeros(3)
    delta = quat.multiply(q1, quat.conjugate(q0))
    axis, angle = quat.to_axis_angle(delta)
    return axis * (angle / (t1 - t0))


# --- carousel ---------------------------------------------------------------------

@dataclass(frozen=True)
class CarouselState:
    items: tuple
    front: int = 0

    def __post_init__(self):
        if self.items and not 0 <= self.front < len(self.items):
            raise ValueError(f"front {self.front} outside items")


def carousel_step(state: CarouselState, action: str):
    """Pure step: 'next' advances the closed loop; 'select' emits the front
    item without changing state. Returns (state, command or None)."""
    if not state.items:
        raise EmptyCarousel("carousel has no items")
    if action == "next":
        return replace(state, front=(state.front + 1) % len(state.items)), None
    if action == "select":
        return state, CarouselSelect(item=state.items[state.front])
    raise ValueError(f"unknown carousel action {action!r}")


def carousel_machine(events, items, cfg: GestureConfig = GestureConfig()):
    """Menu button toggles the carousel; left lateral rotates it; right
    trigger selects the front item."""
    commands = []
    state = CarouselState(items=tuple(items))
    open_ = False
    for e in events:
        if e.kind != "press":
            continue
        if e.device == "left" and e.button == "menu":
            open_ = not open_
        elif open_ and e.device == "left" and e.button == "lateral":
            state, _ = carousel_step(state, "next")
            commands.append(CarouselNext())
        elif open_ and e.device == "right" and e.button == "trigger":
            _, cmd = carousel_step(state, "select")
            commands.append(cmd)
    return commands


MACHINES = {
    "translate": lambda events, cfg, center, items:
        translation_machine(events, cfg),
    "rotate": lambda events, cfg, center, items:
        rotation_machine(events, center, cfg),
    "scale": lambda events, cfg, center, items:
        scale_machine(events, cfg),
    "select": lambda events, cfg, center, items:
        selection_machine(events, cfg),
    "throw": lambda events, cfg, center, items:
        throw_machine(events, cfg),
    "carousel": lambda events, cfg, center, items:
        carousel_machine(events, items, cfg),
}

DEFAULT_CAROUSEL_ITEMS = ("load", "thresholds", "clustering", "lens")


def run_machine(name: str, events, cfg: GestureConfig = GestureConfig(),
                center=(0.0, 0.0, 0.0), items=DEFAULT_CAROUSEL_ITEMS):
    if name not in MACHINES:
        raise ValueError(f"unknown machine {name!r}; "
                         f"choose from {sorted(MACHINES)}")
    # per-device streams are only ordered within a device; fold over the
    # timestamp-merged stream (stable, so ties keep file order)
    merged = sorted(events, key=lambda e: e.timestamp)
    return MACHINES[name](merged, cfg, np.asarray(center, dtype=float),
                          tuple(items))
