"""Service configuration: key=value text file plus CODEWE_* env overrides."""

from __future__ import annotations

import json
import os
import stat
from dataclasses import dataclass, fields
from pathlib import Path

from . import crypto


@dataclass
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8570
    ledger_path: str = "ledger.snapshot"
    cas_dir: str = "cas"
    report_dir: str = "reports"
    admin_key_path: str = ""
    token_file: str = ""
    codesign_record_path: str = ""
    rate_limit_per_minute: int = 10  # 0 disables

    _INT_FIELDS = ("listen_port", "rate_limit_per_minute")


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None) -> ServiceConfig:
    """Parse the config file, then apply CODEWE_<FIELD> env overrides."""
    cfg = ServiceConfig()
    names = {f.name for f in fields(ServiceConfig)}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in names:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            setattr(cfg, key, int(value) if key in ServiceConfig._INT_FIELDS else value)
    env = os.environ if env is None else env
    for name in names:
        override = env.get(f"CODEWE_{name.upper()}")
        if override is not None:
            setattr(cfg, name,
                    int(override) if name in ServiceConfig._INT_FIELDS else override)
    return cfg


def save_keypair(keypair: crypto.KeyPair, path: str | Path) -> None:
    """Write a key file with owner-only permissions."""
    p = Path(path)
    p.touch(mode=0o600, exist_ok=True)
    p.chmod(0o600)
    p.write_text(json.dumps({
        "private_seed": keypair.private_seed.hex(),
        "public_key": keypair.public_key.hex(),
    }) + "\n")


def load_keypair(path: str | Path) -> crypto.KeyPair:
    p = Path(path)
    mode = stat.S_IMODE(p.stat().st_mode)
    if mode & 0o077:
        raise PermissionError(f"{p}: key file must not be group/other readable "
                              f"(mode {oct(mode)})")
    doc = json.loads(p.read_text())
    pair = crypto.keygen(bytes.fromhex(doc["private_seed"]))
    if pair.public_key.hex() != doc["public_key"]:
        raise ValueError(f"{p}: public key does not match seed")
    return pair
