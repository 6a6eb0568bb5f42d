"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES = []


def report(criterion: str, ok: bool, detail: str) -> bool:
    line = f"{criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return ok
