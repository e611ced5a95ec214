import math
from pathlib import Path

import numpy as np
import pytest

from hybridlink.cli import main
from hybridlink.config import load_scenario, parse_scenario
from hybridlink.errors import ConfigurationError
from hybridlink.noise import AwgnNoise, CycloNoise, GmNoise
from hybridlink.ofdm import OfdmConfig
from hybridlink.simulator import Scenario, read_csv
from hybridlink.sync import PreambleSpec, gen_preamble

SCENARIOS = Path(__file__).resolve().parents[1] / "demos" / "scenarios"


def test_empty_config_is_the_default_scenario():
    assert parse_scenario("") == Scenario()


@pytest.mark.parametrize("name", ["coherent", "differential", "awgn_smoke"])
def test_shipped_scenarios_load(name):
    sc = load_scenario(SCENARIOS / f"{name}.ini")
    assert sc.schemes


def test_sweep_forms():
    assert parse_scenario("[scenario]\nsweep = 0:6:2\n").sweep == (0.0, 2.0, 4.0, 6.0)
    assert parse_scenario("[scenario]\nsweep = -1, 0.5\n").sweep == (-1.0, 0.5)
    assert parse_scenario("[scenario]\nsweep = 0:1:0.25\n").sweep == (0, 0.25, 0.5, 0.75, 1)
    with pytest.raises(ConfigurationError):
        parse_scenario("[scenario]\nsweep = 0:6\n")


def test_noise_sections():
    sc = parse_scenario("""
[plc.noise]
kind = cyclo
starts = 0, 0.5
powers = 1, 50
taps.1 = 1, 0.5j
[wl.noise]
kind = awgn
variance = 2
""")
    assert isinstance(sc.plc.noise, CycloNoise)
    regions = sc.plc.noise.params.regions
    assert [r.power for r in regions] == [1, 50]
    assert regions[1].taps == (1, 0.5j)
    assert sc.wl.noise == AwgnNoise(2.0)
    gm = parse_scenario("[plc.noise]\nkind = gm\nweights = 0.5 0.5\nvariances = 1 9\n").plc.noise
    assert isinstance(gm, GmNoise) and gm.average_power == pytest.approx(5.0)


def test_ofdm_override_and_retime():
    sc = parse_scenario("[ofdm]\nsample_rate = 200000\n[wl.ofdm]\nactive = 20:55\n")
    assert sc.plc.ofdm.sample_rate == 200_000
    assert sc.wl.ofdm.active_subcarriers == tuple(range(20, 56))
    assert sc.plc.noise.params.period_samples == 200_000 // 120


def test_code_and_sync_sections():
    sc = parse_scenario("[code]\nconstraint_len = 3\ngenerators = 7, 5\n"
                        "[sync]\nn_syncp = 12\ncross_threshold = 0.5\n")
    assert sc.code.generators == (7, 5) and sc.code.constraint_len == 3
    assert sc.preamble == PreambleSpec(12) and sc.sync.cross == 0.5


def test_taps_file_resolves_next_to_config(tmp_path):
    (tmp_path / "taps.txt").write_text("1 0\n0.5 0.25\n")
    (tmp_path / "s.ini").write_text("[plc.channel]\nkind = static\ntaps_file = taps.txt\n")
    assert load_scenario(tmp_path / "s.ini").plc.channel.taps == (1, 0.5 + 0.25j)


@pytest.mark.parametrize("text", [
    "[bogus]\nx = 1\n",
    "[scenario]\nspeed = 3\n",
    "[plc.noise]\nkind = cyclo\ncolour = pink\n",
    "[plc.noise]\nkind = cyclo\nstarts = 0, 0.5\npowers = 1\n",
    "[plc.noise]\nkind = cyclo\ntaps.5 = 1\n",
    "[plc.noise]\nkind = brown\n",
    "[scenario]\nfec = maybe\n",
    "[scenario]\nseed = one\n",
    "not an ini file",
])
def test_bad_configs(text):
    with pytest.raises(ConfigurationError):
        parse_scenario(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_scenario(tmp_path / "absent.ini")


def test_cli_ber_and_gain(tmp_path, capsys):
    out = tmp_path / "ber.csv"
    assert main(["ber", "--config", str(SCENARIOS / "awgn_smoke.ini"), "--out", str(out)]) == 0
    pts = read_csv(out)
    assert {p.scheme for p in pts} == {"plc_only", "asc"}
    assert main(["gain", "--target-ber", "1e-2", "--curve", str(out), "--baseline", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "asc vs plc_only: " in "\n".join(lines)


def test_cli_seed_override_changes_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = str(SCENARIOS / "awgn_smoke.ini")
    main(["ber", "--config", cfg, "--out", str(a), "--seed", "5"])
    main(["ber", "--config", cfg, "--out", str(b), "--seed", "6"])
    assert a.read_text() != b.read_text()


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[nope]\n")
    assert main(["ber", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    assert "unknown section" in capsys.readouterr().err


def test_cli_detect(tmp_path, rng):
    cfg = OfdmConfig()
    pre = gen_preamble(PreambleSpec(), cfg)
    starts = (500, 500 + pre.size + 3000)
    x = 0.05 * (rng.standard_normal(starts[1] + pre.size + 800)
                + 1j * rng.standard_normal(starts[1] + pre.size + 800))
    for s in starts:
        x[s: s + pre.size] += pre * np.exp(2j * np.pi * 300.0 * np.arange(pre.size) / cfg.sample_rate)
    iq = np.empty(2 * x.size, dtype=np.float32)
    iq[0::2], iq[1::2] = x.real, x.imag
    path = tmp_path / "cap.iq"
    iq.tofile(path)
    out = tmp_path / "det.csv"
    assert main(["detect", str(path), "--out", str(out)]) == 0
    rows = [r.split(",") for r in out.read_text().splitlines()]
    assert rows[0] == ["start", "cfo_hz", "metric"]
    found = [(int(r[0]), float(r[1])) for r in rows[1:]]
    assert len(found) == 2
    for (s, f), true in zip(found, starts):
        assert abs(s - true) <= 2 and abs(f - 300.0) < 15


def test_cli_detect_rejects_odd_file(tmp_path):
    path = tmp_path / "odd.iq"
    np.zeros(3, dtype=np.float32).tofile(path)
    assert main(["detect", str(path)]) == 1


def test_cli_plot(tmp_path):
    pytest.importorskip("matplotlib")
    csv = tmp_path / "c.csv"
    csv.write_text("scheme,ebno_db,bits,bit_errors,ber,ci95\npsdc,0,100,10,0.1,0\npsdc,2,100,1,0.01,0\n")
    assert main(["plot", str(csv), "--out", str(tmp_path / "f.png")]) == 0
    assert (tmp_path / "f.png").stat().st_size > 0
