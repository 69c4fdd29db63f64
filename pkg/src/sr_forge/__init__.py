"""sr-forge: SRCNN and modified-SRCNN super-resolution for anime-style art."""

__version__ = "0.1.0"
