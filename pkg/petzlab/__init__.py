"""
petzlab - numerical laboratory for recoverability refinements of
relative-entropy inequalities.

Modules:
    opmath        dense Hermitian linear algebra
    states        density operators, samplers, cq and interpolation states
    channels      Kraus-form channels and Stinespring dilations
    entropic      entropies, relative entropy, fidelities (bits)
    recovery      Petz maps and the rotating-unitary search
    typicality    relative typical projectors and eigenvalue shells
    inequalities  checkers, reductions, lemmas and refinement
    campaign      seeded sampling campaigns and typicality sweeps
"""

__version__ = "0.1.0"
