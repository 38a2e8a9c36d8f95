from .network import (DihCell, DihNetwork, forward_pass, gradient,
                      induce_network, initial_state, loss, loss_and_gradient,
                      replication_error, residuals_and_jacobian,
                      validate_step_size)
from .trainer import (initial_coefficients, mine_coefficients,
                      mine_trace_sequence)

__all__ = [
    'DihCell', 'DihNetwork', 'induce_network', 'forward_pass',
    'validate_step_size', 'loss', 'gradient', 'loss_and_gradient',
    'residuals_and_jacobian', 'replication_error', 'initial_state',
    'initial_coefficients', 'mine_coefficients', 'mine_trace_sequence'
]
