"""Local HTTP service exposing validation, runs, frames, and analysis."""

from .app import create_app

__all__ = ["create_app"]
