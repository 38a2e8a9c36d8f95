from .manifest_parser import RunManifest, load_manifest, parse_manifest
from .stl_parser import StlParser, parse_formula
from .template_parser import dump_template, load_template, parse_template

__all__ = [
    'parse_template', 'load_template', 'dump_template', 'StlParser',
    'parse_formula', 'RunManifest', 'parse_manifest', 'load_manifest'
]
