"""Shared registry for acceptance verdicts, printed at the end of a pytest run."""

RESULTS: dict = {}


def record(number: int, ok: bool, detail: str) -> None:
    RESULTS[number] = (ok, detail)
    print(line(number))


def line(number: int) -> str:
    ok, detail = RESULTS[number]
    return f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
