import json
import math
import pathlib
import random
import struct
import zlib

import pytest

import mfe

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_force_mapping_endpoints():
    assert mfe.force_to_current(6000.0) == 1750.0
    assert mfe.force_to_current(1.47) == 0.0
    assert mfe.pressure_duty(1.47) == 0.0
    assert mfe.pressure_duty(2.47) == 1.0
    assert mfe.pressure_duty(2.0, pressure_gain=500.0) == pytest.approx(0.5 * 0.53)
    with pytest.raises(ValueError):
        mfe.force_to_current(-1.0)


def test_palm_setpoint_clamps():
    assert mfe.palm_setpoint([80.0] * 27) == 55.0
    assert mfe.palm_setpoint([-5.0] * 27) == 10.0
    assert mfe.palm_setpoint([30.0] * 27) == 30.0


def test_kinematics_matches_phasor_sum():
    q = [math.radians(30)] * 3 + [0.0]
    links = [0.062, 0.048, 0.0365]
    x = y = a = 0.0
    for link, angle in zip(links, q[:3]):
        a += angle
        x += link * math.cos(a)
        y += link * math.sin(a)
    p = mfe.forward_kinematics(q)
    assert p[0] == pytest.approx(x, abs=1e-9)
    assert p[1] == pytest.approx(y, abs=1e-9)
    assert mfe.fingertip_force(mfe.rest_pose(), 0.52) == pytest.approx(4.5, rel=0.05)
    with pytest.raises(ValueError):
        mfe.forward_kinematics([3.0, 0.0, 0.0, 0.0])


def test_encoder_quantum():
    step = math.radians(mfe.ENCODER_QUANTUM_DEG)
    assert mfe.quantize_encoder(10 * step + 0.4 * step) == pytest.approx(10 * step, abs=1e-15)


def test_heartbeat_wire_image_and_crc():
    frame = mfe.encode_heartbeat(3, 1234)
    assert len(frame) == 22
    assert frame[:2] == b"MF"
    (crc,) = struct.unpack("<I", frame[18:22])
    assert crc == zlib.crc32(frame[:18]) == mfe.crc32(frame[:18])
    d = mfe.decode(frame)
    assert d["kind"] == "Heartbeat" and d["sequence"] == 3 and d["timestamp_us"] == 1234
    rng = random.Random(1)
    for _ in range(200):
        bad = bytearray(frame)
        bit = rng.randrange(len(bad) * 8)
        bad[bit // 8] ^= 1 << (bit % 8)
        with pytest.raises(ValueError):
            mfe.decode(bytes(bad))


def test_fluidic_csv_peak():
    lines = mfe.characterize_fluidic_csv([200.0], 2.0).splitlines()
    assert lines[0] == "t_s,input,pressure_kPa,protrusion_mm"
    peak = max(float(row.split(",")[2]) for row in lines[1:])
    assert peak == pytest.approx(2.47, rel=0.02)


def test_session_is_deterministic_and_replays(tmp_path):
    log_path = tmp_path / "cup.csv"
    summary, csv = mfe.run_session("task2-cup", duration=4.0, log_path=str(log_path))
    assert summary["safety_violations"] == 0
    assert summary["ticks"] == 400
    assert log_path.read_text() == csv
    _, again = mfe.run_session("task2-cup", duration=4.0)
    assert again == csv
    report = mfe.replay(csv)
    assert report["ok"] and report["divergences"] == 0
    changed = mfe.replay(csv, force_threshold=2.0)
    assert not changed["ok"]
    assert changed["first_divergent_tick"] is not None


def test_split_matches_combined():
    _, combined = mfe.run_session("task2-cup", duration=2.0, seed=9)
    _, split = mfe.run_session("task2-cup", duration=2.0, seed=9, split=True)
    assert split == combined


def test_scenario_errors():
    assert "task3-thermal" in mfe.builtin_scenario_names()
    with pytest.raises(ValueError):
        mfe.run_session("no-such-scenario")
    summary, _ = mfe.run_session(str(ROOT / "scenarios" / "lossy_link.ini"), duration=6.0)
    assert summary["lost_ticks"] > 0
    assert summary["safety_violations"] == 0


def test_console_schema_is_valid_json():
    schema = json.loads((ROOT / "web" / "console.schema.json").read_text())
    assert schema["$defs"]["telemetry"]["properties"]["schema"]["const"] == mfe.CONSOLE_SCHEMA_VERSION
