"""Matrix-free penalized tensor-product spline smoothing."""

__version__ = "1.0.0"
