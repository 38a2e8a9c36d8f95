__version__ = '0.1.0'
# (major, minor, patch)
version_info = tuple(int(x) for x in __version__.split('.')[:3])
