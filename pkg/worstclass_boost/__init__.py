"""worstclass_boost: boosting for the worst-class error.

Plays Hedge over class weights against a weak learner and returns a majority
vote whose every class-wise training error stays below 1 - theta.
"""

__version__ = "0.1.0"

from worstclass_boost.models.errors import BoostingError  # noqa: E402
from worstclass_boost.services.booster import (  # noqa: E402
    BoostConfig,
    BoostResult,
    run_average_boost,
    run_worstclass_boost,
)

__all__ = ["__version__", "BoostingError", "BoostConfig", "BoostResult", "run_worstclass_boost", "run_average_boost"]
