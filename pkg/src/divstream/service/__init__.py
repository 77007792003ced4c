"""HTTP service exposing the samplers, evaluator, and benchmarks."""

from .app import create_app

__all__ = ["create_app"]
