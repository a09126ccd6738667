"""Prescription structuring engine for OCR'd French medical prescriptions.

Turns OCR layout JSON into structured records: drugs resolved against a
lexicon of official names, each carrying its posology entities (dose,
frequency, duration, comment) attached by page geometry.
"""

__version__ = "0.1.0"

from .errors import OrdonnanceError

__all__ = ["OrdonnanceError", "__version__"]
