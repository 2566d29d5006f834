"""Command-line interface and run-manifest plumbing."""

from .main import main, run
from .manifest import RunManifest, load_manifest, sha256_bytes, sha256_file

__all__ = [
    "RunManifest",
    "load_manifest",
    "main",
    "run",
    "sha256_bytes",
    "sha256_file",
]
