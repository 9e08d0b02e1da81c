"""Numerical toolkit for the sharp CR Sobolev and HLS inequalities on S^{2n+1} and the Heisenberg group.

Modules:
    heisenberg       group law, gauge norm, dilations and the Cayley transform
    polynomial       sparse polynomials in (z, zbar) with exact sphere integrals
    quadrature       exact product rules on the CR sphere
    harmonics        bispherical harmonics, CR vector fields, the conformal sublaplacian
    zonal            bispherical projections of zonal kernels
    functionals      Sobolev energy, sharp constants and deficits
    extremals        the extremal manifold and distances to it
    flow             spectral Galerkin CR Yamabe flow and the local-to-global chain
    local_stability  cutting lemma, certificate constants and sign splitting
    hls              HLS kernel spectrum, energy and deficit
    cli              the `crstab` command
"""

__version__ = "0.1.0"
