"""Python bindings for the multimodal haptic teleoperation core."""

import json as _json

from ._mfe import (  # noqa: F401
    CONSOLE_SCHEMA_VERSION,
    ENCODER_QUANTUM_DEG,
    PROTOCOL_VERSION,
    ConfigError,
    DomainError,
    SensorFault,
    SessionError,
    SingularityError,
    builtin_scenario_names,
    characterize_fluidic_csv,
    characterize_thermo_csv,
    crc32,
    decode,
    encode_heartbeat,
    fingertip_force,
    force_to_current,
    forward_kinematics,
    palm_setpoint,
    pressure_duty,
    quantize_encoder,
    rest_pose,
    workspace_force_range,
)
from . import _mfe


def run_session(scenario, duration=None, seed=None, split=False, log_path=""):
    """Run a headless session; returns (summary dict, session log CSV text)."""
    summary, log = _mfe.run_session(scenario, duration, seed, split, log_path)
    return _json.loads(summary), log


def replay(csv, force_threshold=None):
    """Recompute every command of a session log; returns the report dict."""
    return _json.loads(_mfe.replay_csv(csv, force_threshold))
