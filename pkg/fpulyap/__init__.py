"""FPU-chain maximal Lyapunov exponent toolkit."""

__version__ = "0.1.0"
