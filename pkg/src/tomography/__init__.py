"""Loss-landscape geometry probed by training inside affine subspaces."""

__version__ = "0.1.0"
