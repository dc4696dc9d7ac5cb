"""
Run manifest written next to every command output.

A manifest is a flat `key=value` text file. Replaying it re-runs the recorded
command line, which reproduces the outputs exactly.
"""

import shlex
from dataclasses import dataclass, field
from datetime import datetime, timezone
from utils.consts import SITE_DATA
from utils.errors import ManifestError

REQUIRED_KEYS = ("command", "argv", "version")


@dataclass(frozen=True)
class RunManifest:
    """
    Attributes:
        command (str): Command path, e.g. "sim confcoef".
        argv (tuple[str, ...]): Full argument vector of the run.
        inputs (tuple[str, ...]): Input file paths.
        outputs (tuple[str, ...]): Output file paths.
        alpha (float | None): Nominal level, when the command has one.
        seed (int | None): Master seed, when the command is random.
        threads (int): Worker count used.
        version (str): exoci version.
        created_at (str): UTC timestamp, ISO 8601.
    """

    command: str
    argv: tuple
    inputs: tuple = ()
    outputs: tuple = ()
    alpha: float | None = None
    seed: int | None = None
    threads: int = 1
    version: str = SITE_DATA["VERSION"]
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_text(self) -> str:
        pairs = {
            "command": self.command,
            "argv": shlex.join(self.argv),
            "inputs": shlex.join(self.inputs),
            "outputs": shlex.join(self.outputs),
            "alpha": "" if self.alpha is None else repr(self.alpha),
            "seed": "" if self.seed is None else str(self.seed),
            "threads": str(self.threads),
            "version": self.version,
            "created_at": self.created_at,
        }
        return "".join(f"{key}={value}\n" for key, value in pairs.items())

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.to_text())

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        """
        Reads a manifest file.
        Raises:
            ManifestError: Unreadable file, malformed line or missing key.
        """

        try:
            with open(path, encoding="utf-8") as handle:
                lines = handle.read().splitlines()
        except OSError as exc:
            raise ManifestError(f"cannot read manifest: {exc}") from exc

        values = {}
        for number, line in enumerate(lines, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ManifestError(f"line {number} is not key=value")
            values[key.strip()] = value.strip()
        missing = [k for k in REQUIRED_KEYS if k not in values]
        if missing:
            raise ManifestError(f"missing keys: {', '.join(missing)}")

        try:
            return cls(
                command=values["command"],
                argv=tuple(shlex.split(values["argv"])),
                inputs=tuple(shlex.split(values.get("inputs", ""))),
                outputs=tuple(shlex.split(values.get("outputs", ""))),
                alpha=float(values["alpha"]) if values.get("alpha") else None,
                seed=int(values["seed"]) if values.get("seed") else None,
                threads=int(values.get("threads", "1")),
                version=values["version"],
                created_at=values.get("created_at", ""),
            )
        except ValueError as exc:
            raise ManifestError(f"bad manifest value: {exc}") from exc


def manifest_path(output: str) -> str:
    return f"{output}.manifest"
