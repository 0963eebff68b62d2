"""Two-stage randomized group testing: formulas, designs, simulation and exact enumeration."""

from __future__ import annotations

__version__ = "0.1.0"

__all__: list[str] = ["__version__"]
