"""Shared exception types and process exit codes."""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_INTERNAL = 4


class ProsotokError(Exception):
    """Base class for errors raised by this package."""


class SchemaError(ProsotokError):
    """An input file violates its documented schema (WAV, alignment, manifest, JSONL)."""
