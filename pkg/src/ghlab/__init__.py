"""Gibbons-Hawking laboratory: hyperkahler structures from disc data.

Subpackage map:

- ``holo``         Blaschke products, branch-controlled square root, psi.
- ``tessellation`` ideal-triangle reflection group on the Poincare disc.
- ``covering``     the modular covering map onto the thrice-punctured sphere.
- ``ansatz``       assembly of the potential, connection form, symplectic
                   triple, metric, slice frames and contact forms.
- ``verify``       finite-difference residuals, quaternion and curvature
                   checks, contact-form analysis.
- ``pathlab``      path-length experiments (completeness evidence,
                   horizontal lengths, deformation fingerprints).
- ``cli``          experiment driver emitting CSV/SVG/JSON artifacts.
"""

__version__ = "0.1.0"
