"""Numerical laboratory for fractional conformal operators and volume
comparison on rotationally symmetric asymptotically hyperbolic metrics.

Subpackage map:
    specfun     log-gamma and closed-form round-sphere constants
    geometry    warped metrics, curvature, volumes
    scattering  radial mode solves and branch-coefficient extraction
    compactify  compactified geometry: weighted curvature, energy
    yamabe      zonal Rayleigh quotients and the volume-comparison chain
    escobar     hemisphere compactification and boundary Yamabe constants
    cli         command-line front end
    verify      acceptance checks shared by the CLI and the test suite
"""

__version__ = "0.1.0"
