import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Union


def dump_json(obj: Any, path: Union[str, Path]) -> str:
    """Write ``obj`` as JSON with sorted keys so that reruns are
    byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + '\n')
    return str(path)


def dump_jsonl(items: Iterable[Any], path: Union[str, Path]) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(item, sort_keys=True) for item in items]
    path.write_text(''.join(line + '\n' for line in lines))
    return str(path)


def load_json(path: Union[str, Path]) -> Any:
    with open(path) as f:
        return json.load(f)


def fingerprint(obj: Any) -> str:
    """sha256 of the canonical JSON form of ``obj``."""
    text = json.dumps(obj, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def file_digest(path: Union[str, Path]) -> str:
    sha256 = hashlib.sha256()
    with open(path, 'rb') as f:
        while True:
            buffer = f.read(8192)
            if len(buffer) == 0:
                break
            sha256.update(buffer)
    return sha256.hexdigest()
