"""Long-range quantum correlations of the anisotropic XY spin chain.

Infinite-chain pair states (``thermo``), two-qubit measures (``measures``),
exact diagonalisation of small rings (``finite``) and the sweep/fit layer
(``analysis``).
"""

from .errors import XYCorrError
from .measures import (
    DiscordResult,
    MeasurementDirection,
    Side,
    TwoQubitState,
    concurrence,
    conditional_entropy,
    discord,
    entanglement_of_formation,
    fidelity,
    mutual_information,
    von_neumann_entropy,
)
from .thermo import ModelPoint, GTable, factorization_field, reduced_state

__version__ = "0.1.0"
