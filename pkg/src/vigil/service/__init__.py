"""FastAPI service wrapping the pipeline package."""

from .app import app, create_app

__all__ = ["app", "create_app"]
