"""Bifurcation and firing-pattern analysis of a denatured Morris-Lecar neuron.

The planar model is

    x' = x^2 (1 - x) - y + I
    y' = A exp(alpha x) - gamma y

and the forced variant adds ``I0 sin(omega t)``, a flux variable ``phi`` and
the memductance feedback ``k rho(phi) x``.
"""

from importlib.metadata import PackageNotFoundError, version

from .model import ImprovedParams, OriginalParams

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = ["OriginalParams", "ImprovedParams", "__version__"]
