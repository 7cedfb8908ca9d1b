"""equiszego: checks the leading equivariant Szegő kernel coefficients on model CR spheres."""

__version__ = "0.1.0"
