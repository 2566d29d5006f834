"""Run manifests: what produced an artifact, from what, with what.

Every subcommand that writes an artifact also writes a manifest sidecar
(`<artifact>.manifest.json`) recording the subcommand, the full argument
vector, the resolved configuration, hashes of the inputs, hashes of the
outputs, the wall time, and the toolchain versions.  The manifest
fingerprint covers only the run-determining fields (everything except
wall time and output hashes), so two runs with equal fingerprints are
the same computation and must produce byte-identical artifacts; text
artifacts embed the fingerprint in a header comment, and binary-ish
ones are referenced from the sidecar by hash.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from typing import Mapping


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def toolchain_fingerprint() -> dict[str, str]:
    import numpy
    import scipy
    import sympy

    from .. import __version__

    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
    }


@dataclass
class RunManifest:
    subcommand: str
    argv: tuple[str, ...]
    config: Mapping[str, object]
    input_hashes: dict[str, str] = field(default_factory=dict)
    output_hashes: dict[str, str] = field(default_factory=dict)
    wall_time_s: float = 0.0
    toolchain: Mapping[str, str] = field(default_factory=toolchain_fingerprint)

    def fingerprint(self) -> str:
        """Hash of the run-determining fields.

        Wall time and output hashes are consequences of the run, not
        determinants, so they stay out; everything else in, canonically
        serialized.
        """
        payload = json.dumps(
            {
                "subcommand": self.subcommand,
                "argv": list(self.argv),
                "config": dict(sorted(self.config.items())),
                "input_hashes": dict(sorted(self.input_hashes.items())),
                "toolchain": dict(sorted(self.toolchain.items())),
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return sha256_bytes(payload.encode())

    def to_json(self) -> str:
        return json.dumps(
            {
                "fingerprint": self.fingerprint(),
                "subcommand": self.subcommand,
                "argv": list(self.argv),
                "config": dict(sorted(self.config.items())),
                "input_hashes": dict(sorted(self.input_hashes.items())),
                "output_hashes": dict(sorted(self.output_hashes.items())),
                "wall_time_s": self.wall_time_s,
                "toolchain": dict(sorted(self.toolchain.items())),
            },
            indent=2,
            sort_keys=False,
        ) + "\n"

    def write_sidecar(self, artifact_path: str | os.PathLike) -> str:
        path = f"{os.fspath(artifact_path)}.manifest.json"
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(self.to_json())
        os.replace(tmp, path)
        return path


def load_manifest(path: str | os.PathLike) -> dict:
    with open(path) as fh:
        return json.load(fh)
