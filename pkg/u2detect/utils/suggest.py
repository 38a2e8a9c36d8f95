from typing import Iterable, Optional


def closest_match(query: str,
                  choices: Iterable[str],
                  threshold: int = 60) -> Optional[str]:
    """Return the choice most similar to ``query``, or None if nothing is
    similar enough."""
    from thefuzz import process
    choices = list(choices)
    if not choices:
        return None
    best, score = process.extractOne(query, choices)
    return best if score >= threshold else None


def unknown_name_message(kind: str, name: str, choices: Iterable[str]) -> str:
    choices = list(choices)
    msg = f'Unknown {kind} `{name}`.'
    hint = closest_match(name, choices)
    if hint is not None:
        msg += f' Did you mean `{hint}`?'
    elif choices:
        msg += ' Available: ' + ', '.join(choices) + '.'
    return msg
