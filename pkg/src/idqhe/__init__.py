"""Interaction-driven quantum heat engine with a Lieb-Liniger working medium.

Three levels of description share one cycle: exact finite-N Bethe states
(:mod:`idqhe.bethe`, :mod:`idqhe.gibbs`), Yang-Yang thermodynamics of the
infinite gas (:mod:`idqhe.tba`, :mod:`idqhe.cycle`) and Luttinger-liquid
closed forms (:mod:`idqhe.luttinger`). Units: hbar = 2m = k_B = 1.
"""

__version__ = "0.1.0"

UNITS = "hbar=2m=kB=1"
