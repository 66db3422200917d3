import json
import shutil
import subprocess

import pytest

BINLOC = shutil.which("binloc")


def run_binloc(*args):
    """Invoke the core toolkit's CLI; the only sanctioned route besides the
    artifact files themselves.
    """
    assert BINLOC, "binloc CLI not on PATH"
    proc = subprocess.run([BINLOC, *map(str, args)], capture_output=True, text=True)
    assert proc.returncode == 0, f"binloc {args[0]} failed:\n{proc.stderr}"
    return proc.stdout


TINY_CONFIG = {
    "master_seed": 4242,
    "rooms": [
        {
            "room_id": "r-tiny",
            "size_m": [5.0, 6.0, 3.0],
            "array_center_m": [2.5, 3.0, 1.5],
            "array_yaw_deg": 0.0,
            "distances_m": [1.5, 2.0],
            "rt60_choices_s": [0.2],
        }
    ],
    "snr_choices_db": [20.0, None],
    "noise_kinds": ["white"],
    "heads": {
        "train": [{"head_id": "h-t", "radius_m": 0.0875}],
        "test": [{"head_id": "h-e", "radius_m": 0.082}],
    },
    "counts": {"train": 4, "test": 14},
}


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """A small generated dataset shared across the session: 4 train and 14
    test instances, plus the train head's dictionary.
    """
    root = tmp_path_factory.mktemp("tiny")
    config_path = root / "gen.json"
    config_path.write_text(json.dumps(TINY_CONFIG))
    run_binloc("gen-data", "--config", config_path, "--out", root / "ds")
    run_binloc("gen-hrir", "--radius", 0.0875, "--head-id", "h-t",
               "--out", root / "h-t.dpt")
    run_binloc("build-dict", "--hrir", root / "h-t.dpt", "--out", root / "h-t.dict.dpt")
    return {
        "root": root,
        "manifest": root / "ds" / "manifest.jsonl",
        "dict": root / "h-t.dict.dpt",
    }
