"""Essential spectra of band-dominated lattice operators."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("specx")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
