"""Access loadable plugins."""

from __future__ import annotations

from walklab.ext.presentation import PresentationPlugins

__all__ = ["presentations"]


presentations = PresentationPlugins.load_plugins()
"""Presentation plugins directory."""
