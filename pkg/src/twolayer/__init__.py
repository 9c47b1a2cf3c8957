"""Hamiltonian two-layer flow workbench beyond the Boussinesq limit."""

__version__ = "0.1.0"
