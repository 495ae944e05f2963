"""celab: numerical laboratory for Collet-Eckmann type conditions of rational maps.

Core objects live in the submodules: :mod:`celab.sphere` (chordal geometry),
:mod:`celab.ratmap` (maps, critical points, preimages), :mod:`celab.orbit`
(forward estimators), :mod:`celab.backward` (preimage trees and CE2),
:mod:`celab.cover` (component shrinking, TCE) and :mod:`celab.lab` (CLI).
"""
from .errors import CELabError
from .ratmap import RationalMap
from .sphere import INF, ChordalDisk, chordal_dist

__version__ = "0.1.0"
__all__ = ["CELabError", "RationalMap", "INF", "ChordalDisk", "chordal_dist", "__version__"]
