"""Missing-data benchmark and zero-curve bootstrapping for sovereign auction panels."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"

BUNDLED = ("synthetic_panel", "synthetic_linear_panel")


def bundled_path(name: str = "synthetic_panel") -> Path:
    """Path of a bundled 500-row synthetic panel (``synthetic_panel`` or ``synthetic_linear_panel``)."""
    name = name.removesuffix(".csv")
    if name not in BUNDLED:
        raise ValueError(f"unknown bundled dataset {name!r}; available: {', '.join(BUNDLED)}")
    return Path(str(resources.files(__name__).joinpath("data", f"{name}.csv")))
