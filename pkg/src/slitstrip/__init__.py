"""Critical Ising model on lattice strips and slit-strips: transfer matrices,
Clifford fermions, fusion coefficients and their continuum limits."""

__version__ = "0.1.0"
