"""HDF5-to-Zarr episode conversion and dataset summaries."""

__version__ = "0.1.0"
