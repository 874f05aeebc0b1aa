"""Reference composite-system models with their analytic closed forms."""

from .two_qubit import (
    TwoQubitAnalytics,
    TwoQubitParams,
    build_two_qubit,
    two_qubit_analytics,
)
from .tunnelling import (
    TunnellingAnalytics,
    TunnellingParams,
    build_tunnelling,
    tunnelling_analytics,
)
