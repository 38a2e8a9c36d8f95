from typing import Callable

CACHED_OBJECTS = {}


def load_or_build_object(constructor: Callable, *args, **kwargs):
    """Build ``constructor(*args, **kwargs)`` once and reuse it afterwards.

    Systems are stateless after construction, so one instance per argument
    set is shared between callers.
    """
    obj_id = str((constructor.__qualname__, args, sorted(kwargs.items())))
    if obj_id in CACHED_OBJECTS:
        return CACHED_OBJECTS[obj_id]
    else:
        obj = constructor(*args, **kwargs)
        CACHED_OBJECTS[obj_id] = obj
        return obj
