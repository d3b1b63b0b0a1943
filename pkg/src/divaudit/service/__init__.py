"""HTTP service exposing the audit library."""

from .app import create_app

__all__ = ["create_app"]
