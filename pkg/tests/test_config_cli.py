"""Config document handling and the command-line entry point."""

import pytest

from coopmimo import cli
from coopmimo.config import (
    ConfigError,
    SimConfig,
    _parse_protocols,
    _parse_snr_spec,
    load_config,
    parse_config,
    serialize_config,
    with_overrides,
)
from coopmimo.protocol import ProtocolKind


# --- document parsing ------------------------------------------------------


def test_empty_document_gives_defaults():
    assert parse_config("") == SimConfig()


def test_round_trip_preserves_everything():
    cfg = SimConfig(
        n_s=4,
        modulation="16qam",
        d_sr_km=0.2,
        rho_rd=0.3,
        mode="disjoint",
        snr_db=(0.0, 5.0, 10.0),
        protocols=(ProtocolKind.PDF, ProtocolKind.AF),
        trials=5_000,
        seed=42,
        target_outage=1e-3,
    )
    assert parse_config(serialize_config(cfg)) == cfg


def test_unknown_names_are_rejected():
    with pytest.raises(ConfigError, match="turbo"):
        parse_config("[turbo]\niterations = 8\n")
    with pytest.raises(ConfigError, match="bogus"):
        parse_config("[system]\nbogus = 2\n")


def test_bad_values_name_the_field():
    with pytest.raises(ConfigError, match="trials"):
        parse_config("[sweep]\ntrials = 0\n")
    with pytest.raises(ConfigError, match="rho_sd"):
        parse_config("[correlation]\nrho_sd = 1.0\n")
    with pytest.raises(ConfigError, match="modulation"):
        parse_config("[system]\nmodulation = 8psk\n")
    with pytest.raises(ConfigError, match="mode"):
        parse_config("[power]\nmode = magic\n")


def test_stream_dimensions_must_add_up():
    with pytest.raises(ConfigError, match="n1"):
        SimConfig(n1=3)


def test_threshold_matches_rate():
    assert SimConfig().d_thresh == pytest.approx(1.0)  # rate 1 bit/symbol
    assert SimConfig(l_bits=192).d_thresh == pytest.approx(3.0)


def test_snr_spec_forms():
    assert _parse_snr_spec("0:30:2") == tuple(float(s) for s in range(0, 31, 2))
    assert _parse_snr_spec("0, 10, 20") == (0.0, 10.0, 20.0)
    assert _parse_snr_spec("7") == (7.0,)
    for bad in ("", "10:0:2", "0:10:0", "a:b:c"):
        with pytest.raises(ConfigError):
            _parse_snr_spec(bad)


def test_protocol_list_parsing():
    assert _parse_protocols("pdf, af") == (ProtocolKind.PDF, ProtocolKind.AF)
    with pytest.raises(ConfigError, match="(?i)hybrid"):
        _parse_protocols("pdf,hybrid")


def test_overrides_revalidate():
    cfg = SimConfig()
    assert with_overrides(cfg, trials=5).trials == 5
    with pytest.raises(ConfigError):
        with_overrides(cfg, trials=0)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.ini")


# --- command line ----------------------------------------------------------

FAST = [
    "--snr", "0:10:5",
    "--protocol", "pdf,no_relay",
    "--mode", "nonadaptive",
    "--trials", "400",
    "--seed", "7",
    "--workers", "1",
]


def run_cli(tmp_path, *extra, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*FAST, "--output", str(out), *extra])
    return code, out


def test_cli_happy_path_writes_csv_and_figures(tmp_path, capsys):
    code, out = run_cli(tmp_path)
    assert code == 0
    text = out.read_text()
    header, *lines = [ln for ln in text.splitlines() if ln]
    assert header == "snr_db,protocol,mode,p_out_avg,p_out_s1,p_out_s2,pr_a1,pr_a2,pr_a3,std_err,trials,seed"
    assert len(lines) == 6  # 3 SNR points x 2 protocols
    assert (tmp_path / "out.png").exists()
    assert (tmp_path / "out_cases.png").exists()
    printed = capsys.readouterr().out
    assert "wrote" in printed and "PDF" in printed


def test_cli_no_plot_skips_figures(tmp_path):
    code, out = run_cli(tmp_path, "--no-plot", name="quiet.csv")
    assert code == 0
    assert out.exists()
    assert not (tmp_path / "quiet.png").exists()


def test_cli_same_seed_same_bytes(tmp_path):
    _, first = run_cli(tmp_path, "--no-plot", name="a.csv")
    _, second = run_cli(tmp_path, "--no-plot", name="b.csv")
    assert first.read_bytes() == second.read_bytes()


def test_cli_reads_config_file(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[sweep]\nsnr_db = 5\nprotocols = af\ntrials = 300\nseed = 3\n"
        "[power]\nmode = nonadaptive\n"
    )
    out = tmp_path / "cfg.csv"
    code = cli.main(["--config", str(ini), "--output", str(out), "--no-plot"])
    assert code == 0
    lines = [ln for ln in out.read_text().splitlines() if ln]
    assert len(lines) == 2
    assert "AF" in lines[1]


def test_cli_config_errors_exit_1(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert cli.main(["--snr", "10:0:2", "--output", out]) == 1
    assert cli.main(["--protocol", "warp", "--output", out]) == 1
    assert cli.main(["--trials", "0", "--output", out]) == 1
    assert cli.main(["--config", str(tmp_path / "missing.ini"), "--output", out]) == 1
    capsys.readouterr()  # drop accumulated stderr


def test_cli_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--bogus-flag"])
    assert exc.value.code == 1
    capsys.readouterr()


def test_cli_runtime_failure_exits_2(tmp_path, capsys):
    target = tmp_path / "no_such_dir" / "out.csv"
    code = cli.main([*FAST, "--trials", "50", "--output", str(target), "--no-plot"])
    assert code == 2
    assert not target.exists()
    assert "failed" in capsys.readouterr().err
