"""
Runtime settings for the command line.

Sources, strongest first: CLI flags, HEEGNER_* environment variables (a .env
file in the working directory or ~/.heegner.env is read into the environment),
a JSON file (--config, else ~/.heegner.json), then config_heegner defaults.
"""

import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import config_heegner as config

try:
    from dotenv import load_dotenv

    for _env_file in (Path.cwd() / ".env", Path.home() / ".heegner.env"):
        if _env_file.exists():
            load_dotenv(_env_file)
            print(f"[Config] Loaded .env from {_env_file}", file=sys.stderr)
            break
except ImportError:
    pass

ENV_PREFIX = "HEEGNER_"
DEFAULT_FILE = ".heegner.json"


@dataclass
class HeegnerConfig:
    oracle_budget: int = config.ORACLE["search_budget"]   # nodes per existence search
    count_budget: int = config.ORACLE["count_budget"]     # nodes per orbit count
    precision_slack: int = config.ORACLE["precision_slack"]
    max_workers: int = config.BATCH["max_workers"]
    verbose: bool = False

    @classmethod
    def load(
        cls,
        cli_budget: Optional[int] = None,
        cli_workers: Optional[int] = None,
        cli_verbose: Optional[bool] = None,
        config_path: Optional[str] = None,
    ) -> "HeegnerConfig":
        settings = cls()
        settings._read_file(Path(config_path) if config_path else Path.home() / DEFAULT_FILE)
        settings._read_env()
        if cli_budget is not None:
            settings.oracle_budget = cli_budget
        if cli_workers is not None:
            settings.max_workers = cli_workers
        if cli_verbose:
            settings.verbose = True
        settings._clamp()
        return settings

    def _read_file(self, path: Path):
        if not path.exists():
            return
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (json.JSONDecodeError, OSError) as e:
            print(f"[Config] Failed to load {path}: {e}", file=sys.stderr)
            return
        for field in fields(self):
            if field.name in data:
                setattr(self, field.name, data[field.name])
        print(f"[Config] Loaded from {path}", file=sys.stderr)

    def _read_env(self):
        for field in fields(self):
            name = ENV_PREFIX + field.name.upper()
            raw = os.environ.get(name)
            if not raw:
                continue
            if isinstance(getattr(self, field.name), bool):
                setattr(self, field.name, raw.lower() in ("true", "1", "yes"))
                continue
            try:
                setattr(self, field.name, int(raw))
            except ValueError:
                print(f"[Config] Ignoring {name}={raw!r}: not an integer", file=sys.stderr)

    def _clamp(self):
        if self.oracle_budget < 1:
            self.oracle_budget = config.ORACLE["search_budget"]
        if self.count_budget < 1:
            self.count_budget = config.ORACLE["count_budget"]
        self.precision_slack = max(0, int(self.precision_slack))
        self.max_workers = max(1, int(self.max_workers))


ENV_HELP = {
    "oracle_budget": "Lifting-tree nodes per oracle existence search",
    "count_budget": "Nodes per orbit count; counts are omitted beyond this",
    "precision_slack": "Extra p-adic digits on top of k = n + 2m + 2",
    "max_workers": "Worker threads for batch rows and oracle grids",
    "verbose": "Progress lines on stderr",
}


def create_sample_config(path: Optional[str] = None, env_dir: Optional[str] = None):
    """Write a .env and a JSON file holding the default settings."""
    defaults = asdict(HeegnerConfig())
    env_path = (Path(env_dir) if env_dir else Path.cwd()) / ".env"
    lines = ["# Heegner engine settings (copy to ~/.heegner.env to apply everywhere)", ""]
    for name, value in defaults.items():
        shown = str(value).lower() if isinstance(value, bool) else value
        lines += [f"# {ENV_HELP[name]}", f"{ENV_PREFIX}{name.upper()}={shown}", ""]
    json_path = Path(path) if path else Path.home() / DEFAULT_FILE
    try:
        env_path.write_text("\n".join(lines), encoding="utf-8")
        print(f"[Config] Sample .env created at {env_path}", file=sys.stderr)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        json_path.write_text(json.dumps(defaults, indent=2), encoding="utf-8")
        print(f"[Config] Sample JSON config created at {json_path}", file=sys.stderr)
    except OSError as e:
        print(f"[Config] Failed to write sample config: {e}", file=sys.stderr)
