import importlib

import u2detect.systems
from u2detect.systems import BaseSystem
from u2detect.utils import load_or_build_object, unknown_name_message

NAMES2SYSTEMS = {}


def register_all_systems(module):
    if isinstance(module, str):
        module = importlib.import_module(module)

    for k, v in module.__dict__.items():
        if (isinstance(v, type) and issubclass(v, BaseSystem)
                and (v is not BaseSystem)):
            NAMES2SYSTEMS[k] = v


register_all_systems(u2detect.systems)


def list_systems(with_description=False):
    """List all the registered systems.

    Args:
        with_description (bool): Whether to return the description of
            systems. Defaults to False.

    Returns:
        list: list of system names by default, or list of tuples
        `(system_name, description)` if ``with_description=True``.

    Examples:
        >>> from u2detect import list_systems
        >>> for name, description in list_systems(with_description=True):
        ...     print(name, description)
    """
    if with_description:
        return list((name, cls.DEFAULT_SYSTEMMETA['description'])
                    for name, cls in NAMES2SYSTEMS.items())
    else:
        return list(NAMES2SYSTEMS.keys())


def load_system(system_type: str, **kwargs) -> BaseSystem:
    """Load a case-study system.

    Args:
        system_type (str): The registered system name. You can find the
            supported systems by :func:`~u2detect.apis.list_systems`.
        **kwargs: key-word arguments to build the specific system.

    Returns:
        BaseSystem: The constructed system. Systems built with the same
        arguments are shared.

    Examples:
        >>> from u2detect import load_system
        >>> system = load_system('BergmanMinimalModel')
        >>> system = load_system('BergmanMinimalModel', g0=140.0)
    """
    if system_type not in NAMES2SYSTEMS:
        # Using ValueError to show error msg cross lines.
        raise ValueError(
            unknown_name_message('system', system_type, NAMES2SYSTEMS))

    return load_or_build_object(NAMES2SYSTEMS[system_type], **kwargs)
