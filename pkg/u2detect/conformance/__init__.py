from .calibration import (build_calibration, calibrate, calibrate_residues,
                          conformal_rank)
from .detector import detect, detect_batch, judge
from .surrogate import validate_surrogate

__all__ = [
    'conformal_rank', 'calibrate_residues', 'calibrate', 'build_calibration',
    'detect', 'detect_batch', 'judge', 'validate_surrogate'
]
