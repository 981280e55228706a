"""Numerical toolkit for two-phase incompressible flow with phase transition.

Modules
-------
thermo          phase free-energy laws and derived thermodynamic quantities
geometry        graphs over a reference sphere, normals and curvature
equilibria      equilibrium radius/temperature and entropy probes
flat_symbols    flat-interface boundary symbols and Lopatinskii determinants
zerocert        argument-principle winding certificates
sphere_spectral per-mode spectral analysis of the linearization at a ball
cli             command line driver
acceptance      acceptance checks shared by the tests and `twophase selftest`
"""

__version__ = "0.1.0"
