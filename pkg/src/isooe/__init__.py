"""Computational companion for isometric orbit equivalence of free-group actions.

Modules
    words     reduced words, balls and spheres in free and Coxeter groups
    schreier  finite coset actions: parity criteria, normality, spectra
    treeiso   truncated isometries of the Cayley tree and the sigma cocycle
    coloring  rainbow 5-colourings and the two F_2-actions on them
    cli       command-line front end (``isooe``)
"""

from .words import GroupPreset, ReducedWord

__all__ = ["GroupPreset", "ReducedWord"]
__version__ = "0.1.0"
