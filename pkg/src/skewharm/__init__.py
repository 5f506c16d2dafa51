"""Spectra, pseudospectra and decay rates of the harmonic oscillator with a
large imaginary potential, H = -d^2/dx^2 + x^2 + (i/eps) f(x) on the line.

Subpackages by task: potentials (the model family f), operators (grids and
finite-difference assembly), linalg (banded factorisation and eigen-solvers),
pseudospectrum (resolvent norms along the imaginary axis), spectrum
(eigenvalues, semiclassical predictions and scaling fits), hypocoercivity
(quadratic-functional decay rates and time integration), cli (command line).
"""

__version__ = "0.1.0"
