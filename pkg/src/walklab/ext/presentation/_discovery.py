from __future__ import annotations

import re
from importlib.metadata import entry_points
from typing import TYPE_CHECKING

from walklab.exceptions import InvalidInputError

if TYPE_CHECKING:
    from walklab.ext.presentation import Presentation


__all__ = ["PresentationPlugins", "SPEC_PATTERN"]

SPEC_PATTERN = re.compile(r"^(?P<kind>[a-z][a-z0-9_]*):(?P<k>[0-9]+)$")
"""Regular expression for a presentation spec string such as ``free:2``."""


class PresentationPlugins:
    """A class for accessing loadable presentation plugins."""

    def __init__(self, plugins: dict[str, type[Presentation]]) -> None:
        self.plugins = plugins

    @classmethod
    def load_plugins(cls) -> PresentationPlugins:
        """Load presentation plugins from the ``walklab.presentations``
        entry_point metadata of installed packages.

        Notes
        -----
        Presentation plugins are declared by a package's entry points. This
        is the fragment from walklab's own ``pyproject.toml``::

        [project.entry-points.'walklab.presentations']
        free = "walklab.presentations.free:FreePresentation"
        """
        discovered_plugins = {
            entry_point.name: entry_point.load()
            for entry_point in entry_points(group="walklab.presentations")
        }
        return cls(discovered_plugins)

    @property
    def names(self) -> list[str]:
        """The names of available presentation plugins."""
        return sorted(self.plugins.keys())

    def __getitem__(self, key: str) -> type[Presentation]:
        """Get the plugin for the given name."""
        return self.plugins[key]

    def __contains__(self, key: str) -> bool:
        """Determine if the plugin is available, by name."""
        return key in self.plugins

    def create(self, spec: str, *, k_cap: int | None = None) -> Presentation:
        """Instantiate a presentation from a spec string.

        Parameters
        ----------
        spec
            Spec string ``kind:k``, such as ``lfgroup:4``.
        k_cap
            Optional override of the upper bound on ``k``.

        Raises
        ------
        walklab.exceptions.InvalidInputError
            Raised if the spec string is malformed or names an unknown kind.
        """
        m = SPEC_PATTERN.match(spec.strip())
        if not m:
            raise InvalidInputError(
                f"Expected a presentation spec like 'free:2', got {spec!r}."
            )
        kind = m["kind"]
        if kind not in self:
            raise InvalidInputError(
                f"'{kind}' is not a known presentation. Available "
                f"presentations are: {', '.join(self.names)}."
            )
        if k_cap is None:
            return self[kind](int(m["k"]))
        return self[kind](int(m["k"]), k_cap=k_cap)
