from .cache import load_or_build_object
from .file import dump_json, dump_jsonl, file_digest, fingerprint, load_json
from .logging import LOGGER_NAME, get_logger
from .parallel import track_map
from .suggest import closest_match, unknown_name_message

__all__ = [
    'load_or_build_object', 'dump_json', 'dump_jsonl', 'load_json',
    'fingerprint', 'file_digest', 'get_logger', 'LOGGER_NAME', 'track_map',
    'closest_match', 'unknown_name_message'
]
