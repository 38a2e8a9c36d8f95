from .system import list_systems, load_system

__all__ = ['list_systems', 'load_system']
