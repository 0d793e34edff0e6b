"""Pipeline configuration: one key-value file binding every knob.

Format: `key = value` lines, `#` comments, blank lines ignored.  Relative
paths are resolved against the config file's directory.  Every default is
listed in DEFAULTS and documented in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from datetime import date
from importlib import resources
from pathlib import Path

from .graph import DENOISE_VARIANTS
from .outputs import LEADER_STRATEGIES

INPUT_TABLES = ("projects", "project_commits", "watchers", "forks_of", "commits", "issues", "pull_requests")

# Event-count kind -> config key of the table it is counted from.
KIND_TO_TABLE = {
    "stars": "watchers",
    "forks": "forks_of",
    "commits": "commits",
    "issues": "issues",
    "pull_requests": "pull_requests",
}

DEFAULTS = {
    "dump_format": "csv",
    "delta": "0.001",
    "epoch": "1970-01-01",
    "min_shared": "1",
    "denoise_lo": "2",
    "denoise_hi": "5",
    "denoise_variant": "formula",
    "leader_strategy": "mean",
    "memory_budget": str(256 * 1024 * 1024),
    "filter_deleted": "false",
    "debug_sorted_tsv": "false",
}


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    projects: Path
    project_commits: Path
    watchers: Path
    forks_of: Path
    commits: Path
    issues: Path
    pull_requests: Path
    work_dir: Path
    blacklist: Path | None = None
    dump_format: str = "csv"
    delta: float = 0.001
    epoch: date = date(1970, 1, 1)
    min_shared: int = 1
    denoise_lo: int = 2
    denoise_hi: int = 5
    denoise_variant: str = "formula"
    leader_strategy: str = "mean"
    memory_budget: int = 256 * 1024 * 1024
    filter_deleted: bool = False
    debug_sorted_tsv: bool = False
    source: Path | None = field(default=None, compare=False)

    def table_path(self, table: str) -> Path:
        return getattr(self, table)

    def blacklist_path(self) -> Path:
        """The configured blacklist, or the packaged starter set."""
        if self.blacklist is not None:
            return self.blacklist
        return default_blacklist_path()


def default_blacklist_path() -> Path:
    return Path(str(resources.files("repodedup").joinpath("data/default_blacklist.txt")))


def parse_config_text(text: str, base_dir: Path, source: Path | None = None) -> PipelineConfig:
    raw = dict(DEFAULTS)
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        if "=" not in body:
            raise ConfigError(f"line {line_no}: expected `key = value`, got {body!r}")
        key, _, value = body.partition("=")
        raw[key.strip()] = value.strip()

    missing = [t for t in INPUT_TABLES + ("work_dir",) if t not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    def path_of(key: str) -> Path:
        p = Path(raw[key])
        return p if p.is_absolute() else base_dir / p

    try:
        config = PipelineConfig(
            projects=path_of("projects"),
            project_commits=path_of("project_commits"),
            watchers=path_of("watchers"),
            forks_of=path_of("forks_of"),
            commits=path_of("commits"),
            issues=path_of("issues"),
            pull_requests=path_of("pull_requests"),
            work_dir=path_of("work_dir"),
            blacklist=path_of("blacklist") if "blacklist" in raw else None,
            dump_format=raw["dump_format"],
            delta=float(raw["delta"]),
            epoch=date.fromisoformat(raw["epoch"]),
            min_shared=int(raw["min_shared"]),
            denoise_lo=int(raw["denoise_lo"]),
            denoise_hi=int(raw["denoise_hi"]),
            denoise_variant=raw["denoise_variant"],
            leader_strategy=raw["leader_strategy"],
            memory_budget=int(raw["memory_budget"]),
            filter_deleted=raw["filter_deleted"].lower() in ("1", "true", "yes"),
            debug_sorted_tsv=raw["debug_sorted_tsv"].lower() in ("1", "true", "yes"),
            source=source,
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err

    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    return config


def load_config(path: Path | str) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return parse_config_text(text, base_dir=path.parent.resolve(), source=path)


def validate(config: PipelineConfig) -> list[str]:
    """All problems found, as human-readable findings; empty means valid."""
    findings: list[str] = []
    for table in INPUT_TABLES:
        p = config.table_path(table)
        if not p.is_file():
            findings.append(f"{table}: input file does not exist: {p}")
    blacklist = config.blacklist_path()
    if not blacklist.is_file():
        findings.append(f"blacklist: file does not exist: {blacklist}")
    if config.dump_format not in ("csv", "tsv"):
        findings.append(f"dump_format: must be csv or tsv, got {config.dump_format!r}")
    if config.delta <= 0:
        findings.append(f"delta: must be positive, got {config.delta}")
    if config.min_shared < 1:
        findings.append(f"min_shared: must be at least 1, got {config.min_shared}")
    if config.denoise_lo > config.denoise_hi:
        findings.append(
            f"denoise bounds out of order: lo={config.denoise_lo} hi={config.denoise_hi}"
        )
    if config.denoise_lo < 1:
        findings.append(f"denoise_lo: must be at least 1, got {config.denoise_lo}")
    if config.denoise_variant not in DENOISE_VARIANTS:
        findings.append(f"denoise_variant: expected one of {DENOISE_VARIANTS}")
    if config.leader_strategy not in LEADER_STRATEGIES:
        findings.append(f"leader_strategy: expected one of {LEADER_STRATEGIES}")
    if config.memory_budget < 64 * 1024 * 1024:
        findings.append(f"memory_budget: below the 64 MiB floor ({config.memory_budget})")
    return findings
