"""neckscope: numerical geometry of rotationally symmetric manifolds.

Subpackages cover metric construction and geodesics (:mod:`neckscope.warped`),
neck certification (:mod:`neckscope.necks`), asymptotic invariants and volume
comparison (:mod:`neckscope.asymptotics`), parallel-hypersurface area bounds
(:mod:`neckscope.hypersurfaces`), curvature-operator pinching algebra
(:mod:`neckscope.pinching`), a rotationally symmetric Ricci flow integrator
(:mod:`neckscope.flow`), and the quantitative constant chain linking neck
quality to curvature-ratio lower bounds (:mod:`neckscope.chain`).
"""

__version__ = "0.1.0"
