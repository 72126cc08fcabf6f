from .exception_handler import exception_handler
from .parallelize import CellFailure, parallelize, run_cells
from .run_logger import run_logger

__all__ = ["exception_handler", "run_logger", "parallelize", "run_cells", "CellFailure"]
