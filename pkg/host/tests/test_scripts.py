import json
import pathlib
import subprocess
import sys

import pytest

from fabricsim import load_overlay as native_load
from fabricsim import read_pgm

EXAMPLES = pathlib.Path(__file__).resolve().parents[1] / "examples"


def run_json(cmd):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout.strip().splitlines()[-1])


def test_script_optimized_digest_matches_native(small_image_path):
    payload = run_json([
        sys.executable, "-m", "fabrichost.script_optimized",
        "--image", small_image_path, "--reps", "2", "--warmup", "0", "--json",
    ])
    from fabricsim import edge_detect_naive

    img = read_pgm(small_image_path)
    assert payload["digest"] == edge_detect_naive(img).digest()
    assert payload["seconds"] > 0


def test_script_fabric_digest_matches_native(small_image_path, overlay_path):
    payload = run_json([
        sys.executable, "-m", "fabrichost.script_fabric",
        "--image", small_image_path, "--overlay", overlay_path,
        "--reps", "2", "--warmup", "0", "--json",
    ])
    ov = native_load(overlay_path)
    img = read_pgm(small_image_path)
    edges, _ = ov.run_pipeline(img)
    assert payload["digest"] == edges.digest()
    comp = payload["components"]
    assert comp["dma_in_s"] > 0 and comp["compute_s"] > 0


def test_example_wrappers_run(small_image_path, overlay_path):
    out = subprocess.run(
        [sys.executable, str(EXAMPLES / "script_optimized_pipeline.py"),
         "--image", small_image_path, "--reps", "1", "--warmup", "0"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0, out.stderr
    assert "digest" in out.stdout
    out = subprocess.run(
        [sys.executable, str(EXAMPLES / "script_fabric_pipeline.py"),
         "--image", small_image_path, "--overlay", overlay_path,
         "--reps", "1", "--warmup", "0"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0, out.stderr
    assert "digest" in out.stdout


def test_naive_port_demo_matches_golden(small_image_path):
    payload = run_json([
        sys.executable, str(EXAMPLES / "naive_port_demo.py"),
        "--image", small_image_path, "--crop", "48", "--json",
    ])
    assert payload["matches_golden"] is True
    assert payload["slowdown_vs_optimized"] > 1


def test_script_missing_image_fails_cleanly(overlay_path, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fabrichost.script_fabric",
         "--image", str(tmp_path / "none.pgm"), "--overlay", overlay_path],
        capture_output=True, text=True,
    )
    assert proc.returncode != 0
