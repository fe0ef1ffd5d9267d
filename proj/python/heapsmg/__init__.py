"""Shape analysis of pointer programs written in MIL."""

from ._core import ParseError, analyze, parse

__all__ = ["ParseError", "analyze", "parse", "analyze_file"]


def analyze_file(path, mode="verifier", ptr_size=8, dot=False):
    """Analyse the MIL program stored at ``path``."""
    with open(path, encoding="utf-8") as f:
        return analyze(f.read(), mode=mode, ptr_size=ptr_size, dot=dot)
