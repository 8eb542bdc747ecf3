"""Classical and quantum periodic orbits of a spin-orbit-coupled particle
confined to two dimensions by a power-law central potential.

Subpackage map:

  special_functions  Bessel J_n, Gamma, adaptive quadrature (self-contained)
  classical_orbits   zero-energy orbits, spin precession, ODE cross-checks
  gauge_field        SU(2)-valued gauge potential / field strength / holonomy
  quantum_waves      Bessel radial modes, angular modes, coherent superposition
  qcc_analysis       density-ridge extraction and orbit comparison metrics
  cli                command-line front end (also `python -m spinorbit2d.cli`)
"""

__version__ = "0.1.0"
