import pytest

from codewe import crypto
from codewe.config import ServiceConfig, load_config, load_keypair, save_keypair


def test_defaults():
    cfg = load_config(env={})
    assert cfg == ServiceConfig()


def test_file_parsing(tmp_path):
    path = tmp_path / "codewe.conf"
    path.write_text(
        "# service settings\n"
        "\n"
        "listen_host = 0.0.0.0\n"
        "listen_port=9000\n"
        "rate_limit_per_minute = 0\n"
        "cas_dir = /var/lib/codewe/cas\n")
    cfg = load_config(path, env={})
    assert cfg.listen_host == "0.0.0.0"
    assert cfg.listen_port == 9000
    assert cfg.rate_limit_per_minute == 0
    assert cfg.cas_dir == "/var/lib/codewe/cas"
    assert cfg.ledger_path == "ledger.snapshot"  # untouched default


def test_env_overrides_file(tmp_path):
    path = tmp_path / "codewe.conf"
    path.write_text("listen_port=9000\n")
    cfg = load_config(path, env={"CODEWE_LISTEN_PORT": "9100",
                                 "CODEWE_REPORT_DIR": "/tmp/reports"})
    assert cfg.listen_port == 9100
    assert cfg.report_dir == "/tmp/reports"


def test_unknown_key_and_bad_syntax(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("no_such_key=1\n")
    with pytest.raises(ValueError):
        load_config(bad, env={})
    bad.write_text("just a line\n")
    with pytest.raises(ValueError):
        load_config(bad, env={})


def test_keypair_roundtrip(tmp_path):
    pair = crypto.keygen(crypto.sha256(b"cfg"))
    path = tmp_path / "admin.key"
    save_keypair(pair, path)
    assert path.stat().st_mode & 0o777 == 0o600
    loaded = load_keypair(path)
    assert loaded == pair


def test_keypair_permission_enforcement(tmp_path):
    pair = crypto.keygen(crypto.sha256(b"cfg2"))
    path = tmp_path / "loose.key"
    save_keypair(pair, path)
    path.chmod(0o644)
    with pytest.raises(PermissionError):
        load_keypair(path)


def test_keypair_mismatched_public_key(tmp_path):
    import json
    pair = crypto.keygen(crypto.sha256(b"cfg3"))
    path = tmp_path / "forged.key"
    path.touch(mode=0o600)
    path.write_text(json.dumps({"private_seed": pair.private_seed.hex(),
                                "public_key": "ab" * 32}))
    with pytest.raises(ValueError):
        load_keypair(path)
