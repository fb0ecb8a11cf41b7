import json
import os
import subprocess
import sys

import numpy as np
import pytest

from twistedhom.cli import main
from twistedhom.io import encode_pgm, read_image_csv, read_pgm, read_sidecar


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_probabilities_table(capsys):
    code, out, _ = run(capsys, "probabilities", "--family", "phi_minus", "--m", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "method,p_cc,p_dd,p_cd,quadrature_error,converged"
    assert lines[1] == "analytic,0,0,1,0,true"
    assert lines[2].startswith("numeric,")


def test_probabilities_with_delay_skips_analytic(capsys, tmp_path):
    code, out, _ = run(capsys, "probabilities", "--tau", "1e-12", "--out", str(tmp_path))
    assert code == 0
    assert "analytic" not in out
    assert (tmp_path / "probabilities.csv").read_text() == out
    assert (tmp_path / "VERSION").read_text() == "twistedhom 0.1.0\n"


def test_dip_scan(capsys, tmp_path):
    code, out, _ = run(capsys, "dip-scan", "--set", "hom.n_tau=5", "--out", str(tmp_path))
    assert code == 0
    rows = [r for r in out.splitlines() if r and not r.startswith("#")]
    assert rows[0] == "tau_s,tau_sigma_units,p_cd,quadrature_error"
    p = [float(r.split(",")[2]) for r in rows[1:]]
    assert len(p) == 5 and p[2] < 1e-3 and p[0] > 0.49
    assert json.loads((tmp_path / "config.json").read_text())["hom"]["n_tau"] == 5


def test_image_outputs(capsys, tmp_path):
    code, _, _ = run(capsys, "image", "--out", str(tmp_path), "--set", "quadrature.n_rho=64",
                     "--set", "quadrature.n_phi=128")
    assert code == 0
    for name in ("n_d", "n_d_reference", "c_d", "c_c", "s_d", "mach_zehnder"):
        for fmt in ("csv", "pgm"):
            assert (tmp_path / f"{name}.{fmt}").exists()
            assert (tmp_path / f"{name}.{fmt}.meta.txt").exists()
    vals, valid = read_image_csv(tmp_path / "s_d.csv")
    assert vals.shape == (50, 50)
    assert np.allclose(np.abs(vals[valid]), 0.5, atol=1e-6)
    meta = read_sidecar(tmp_path / "c_d.csv.meta.txt")
    assert meta["state"] == "product_opposite(m=1)" and meta["floor"] == "0.001"
    levels, _ = read_pgm((tmp_path / "n_d.pgm").read_bytes())
    assert levels.shape == (50, 50)
    summary = dict(ln.split("=", 1) for ln in (tmp_path / "summary.txt").read_text().splitlines())
    assert float(summary["hom_masked_p_cd"]) == pytest.approx(0.375, abs=1e-6)


def test_snr_command(capsys, tmp_path):
    code, _, _ = run(capsys, "snr", "--out", str(tmp_path), "--n-tps", "100", "--n-cs", "50",
                     "--set", "quadrature.n_rho=32", "--set", "quadrature.n_phi=64")
    assert code == 0
    assert read_sidecar(tmp_path / "snr_tps.csv.meta.txt")["n_tps"] == "100"
    assert read_sidecar(tmp_path / "snr_cs.csv.meta.txt")["n_cs"] == "50.0"


def test_encrypt_demo(capsys, tmp_path):
    code, out, _ = run(capsys, "encrypt-demo", "--out", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0] == "passed=True"
    src = read_pgm((tmp_path / "source.pgm").read_bytes())[0]
    rec = read_pgm((tmp_path / "recovered.pgm").read_bytes())[0]
    assert src.shape == rec.shape == (50, 50)


def test_encrypt_demo_failure_exit(capsys, tmp_path):
    code, out, _ = run(capsys, "encrypt-demo", "--out", str(tmp_path), "--set", "encryption.support=2.0")
    assert code == 4
    assert "passed=False" in out


def test_encrypt_demo_custom_source(capsys, tmp_path):
    bits = np.zeros((10, 10), dtype=np.uint8)
    bits[:, 5:] = 255
    src = tmp_path / "src.pgm"
    src.write_bytes(encode_pgm(bits))
    code, _, _ = run(capsys, "encrypt-demo", "--out", str(tmp_path / "o"), "--set", "sensor.n_x=10",
                     "--set", "sensor.n_y=10", "--set", f"encryption.source={json.dumps(str(src))}")
    assert code == 0
    code, _, err = run(capsys, "encrypt-demo", "--out", str(tmp_path / "o"),
                       "--set", f"encryption.source={json.dumps(str(src))}")
    assert code == 3 and "source bitmap" in err


def test_masks_command(capsys, tmp_path):
    code, out, _ = run(capsys, "masks", "--out", str(tmp_path))
    assert code == 0
    names = sorted(os.path.basename(p) for p in out.split())
    assert names == ["mask_checkerboard.pgm", "mask_cross.pgm", "mask_half.pgm", "mask_quadrant.pgm", "mask_rings.pgm"]
    assert (tmp_path / "mask_half.pgm").read_bytes().startswith(b"P5")


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    assert out.count("PASS") == 8


@pytest.mark.parametrize("argv, expected", [
    (["probabilities", "--set", "envelope.theta_c=-1"], 2),
    (["probabilities", "--set", "nope.key=1"], 2),
    (["probabilities", "--family", "phi_minus", "--m", "0"], 2),
    (["probabilities", "--threads", "0"], 2),
    (["probabilities", "--config", "/nonexistent/cfg.json"], 3),
    (["image", "--set", "mask.kind=\"raster\"", "--set", "mask.file=\"/nonexistent.pgm\""], 3),
    (["image", "--set", "envelope.theta_c=1e-9"], 1),
])
def test_exit_codes(capsys, tmp_path, argv, expected):
    code, _, err = run(capsys, *argv, "--out", str(tmp_path))
    assert code == expected
    assert err


def test_bad_pgm_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P7\n1 1\n255\n\x00")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mask": {"kind": "raster", "file": str(bad)}}))
    code, _, err = run(capsys, "image", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 3 and "PGM" in err


def test_malformed_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"state": {"m": 1,}}')
    code, _, err = run(capsys, "probabilities", "--config", str(cfg))
    assert code == 2 and "malformed JSON" in err


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["image", "--backend", "gpu"])
    assert info.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twistedhom", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "twistedhom 0.1.0"


def _snapshot(d):
    return {f: (d / f).read_bytes() for f in sorted(os.listdir(d))}


def test_image_deterministic_across_threads(capsys, tmp_path):
    snaps = []
    for threads in ("1", "3", "1"):
        code, _, _ = run(capsys, "image", "--out", str(tmp_path), "--threads", threads,
                         "--set", "quadrature.n_rho=64", "--set", "quadrature.n_phi=128")
        assert code == 0
        snaps.append(_snapshot(tmp_path))
    assert len(snaps[0]) == 27
    assert snaps[0] == snaps[1] == snaps[2]
