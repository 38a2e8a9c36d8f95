from .random_models import random_coefficients, random_template, random_trace

__all__ = ['random_template', 'random_coefficients', 'random_trace']
