"""Nearly unstable AR(inf) processes: convolution series, path simulation and limit laws."""

__version__ = "0.1.0"
