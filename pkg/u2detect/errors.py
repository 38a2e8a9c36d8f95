from typing import Optional


class TemplateError(ValueError):
    """Invalid model template. ``location`` is a JSON path when the error
    comes from parsing a document."""

    def __init__(self, msg: str, location: Optional[str] = None):
        if location:
            msg = f'{location}: {msg}'
        super().__init__(msg)
        self.location = location


class ShapeError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


class HorizonError(ValueError):
    pass


class FormulaSyntaxError(ValueError):

    def __init__(self, msg: str, text: str = '', pos: int = -1):
        if pos >= 0:
            msg = f'{msg} at position {pos}: {text[:pos]}<here>{text[pos:]}'
        super().__init__(msg)
        self.pos = pos


class DegenerateReferenceError(ValueError):
    pass


class InsufficientCalibrationData(ValueError):
    pass


class ScenarioError(ValueError):
    pass


class ManifestError(ValueError):
    pass


class SimulationDiverged(RuntimeError):

    def __init__(self, step: int):
        super().__init__(
            'Reference integration produced non-finite values at step '
            f'{step}.')
        self.step = step


class ForwardPassDiverged(RuntimeError):

    def __init__(self, step: int):
        super().__init__(
            f'Network state became non-finite at step {step}; the sampling '
            'period is too large or the weights are unstable.')
        self.step = step


class TrainingDiverged(RuntimeError):

    def __init__(self, epoch: int, reason: str = 'non-finite loss'):
        super().__init__(f'Training diverged at epoch {epoch}: {reason}.')
        self.epoch = epoch
