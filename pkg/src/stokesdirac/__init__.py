"""Discrete Stokes-Dirac structures, gauge reduction and port-Hamiltonian dynamics on simplicial meshes."""

__version__ = "0.1.0"
