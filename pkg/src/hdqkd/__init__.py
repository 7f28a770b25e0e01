"""Key-rate bounds for time-bin entanglement QKD with Franson-type interferometers.

Modules, bottom up: ``linalg`` (Hermitian helpers), ``model`` (states and the
interferometer), ``povm`` (labelled measurements and click formulas),
``noise`` (photon-counting visibility), ``entropy`` (quadrature, SDP and
solvers), ``keyrate`` (Devetak-Winter rates and sweeps) and ``cli``.
"""

from .model import Protocol, ProtocolConfig
from .noise import NoiseParams

__version__ = "0.1.0"

__all__ = ["NoiseParams", "Protocol", "ProtocolConfig", "__version__"]
