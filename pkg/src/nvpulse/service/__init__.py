"""HTTP service layer: pydantic schemas and the FastAPI application."""

from .app import app, create_app  # noqa: F401
