"""Planning and simulation toolkit for C+L band CDC-ROADM nodes."""

__version__ = "0.1.0"
