"""Two-part MDL learnability analysis and a simulator for identifying a
computable distribution from i.i.d. positive samples."""

__version__ = "0.1.0"
