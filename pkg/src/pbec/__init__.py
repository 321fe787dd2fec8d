"""Photon Bose-Einstein condensate in a dye microcavity: mean-field solver,
Bogoliubov photoluminescence spectra and a spectrometer forward model."""

__version__ = "0.1.0"

from .params import PhysicalParams, DerivedQuantities  # noqa: E402
from .grids import SpectrumGrid  # noqa: E402
from .instrument import InstrumentConfig, ResolutionBudget  # noqa: E402

__all__ = ["PhysicalParams", "DerivedQuantities", "SpectrumGrid", "InstrumentConfig", "ResolutionBudget",
           "__version__"]
