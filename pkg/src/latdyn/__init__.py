"""latdyn: latent dynamics learning from rendered physical simulations."""

__version__ = "0.1.0"
