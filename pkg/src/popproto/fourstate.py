"""Four-state exact-majority protocol used both standalone and as the
backup layer of the phased protocol.

States: strong "A"/"B" carry the input tokens, weak "a"/"b" carry only an
opinion. Rules: (A,B)->(a,b), (A,b)->(A,a), (B,a)->(B,b); everything else
is a no-op. The difference #A - #B is conserved exactly, so the surviving
strong side is always the true initial majority.
"""

from __future__ import annotations

from collections import Counter
from typing import Optional

from .core import Protocol

STATES = ("A", "B", "a", "b")

WIN_A = "WIN_A"
WIN_B = "WIN_B"

OUTPUT = {"A": WIN_A, "a": WIN_A, "B": WIN_B, "b": WIN_B}


def fourstate_update(s: str, o: str) -> str:
    """One-sided rule: the new state of `s` after meeting `o`."""
    if s == "A" and o == "B":
        return "a"
    if s == "B" and o == "A":
        return "b"
    if s == "b" and o == "A":
        return "a"
    if s == "a" and o == "B":
        return "b"
    return s


class FourStateProtocol(Protocol):
    def update(self, s: str, o: str, responder: bool) -> str:
        return fourstate_update(s, o)

    def state_name(self, s: str) -> str:
        return s

    def output(self, s: str) -> str:
        return OUTPUT[s]


def certificate(c: Counter) -> Optional[str]:
    """Stable decision, or None. Sound: once the minority side (strong and
    weak) is extinct, no rule can re-create it."""
    if c.get("B", 0) == 0 and c.get("b", 0) == 0:
        return WIN_A
    if c.get("A", 0) == 0 and c.get("a", 0) == 0:
        return WIN_B
    return None


def initial_counts(n: int, eps_n: int, majority_side: str = "A") -> Counter:
    """Counts for n agents with discrepancy eps_n in favour of majority_side."""
    if n < 2:
        raise ValueError("population size must be at least 2")
    if eps_n < 0 or eps_n > n or (n - eps_n) % 2 != 0:
        raise ValueError("eps*n must be in [0, n] with the same parity as n")
    hi = (n + eps_n) // 2
    lo = (n - eps_n) // 2
    if majority_side == "A":
        return Counter({"A": hi, "B": lo})
    if majority_side == "B":
        return Counter({"B": hi, "A": lo})
    raise ValueError("majority_side must be 'A' or 'B'")


PROTOCOL_FILE = """\
# Four-state exact majority
state A output=WIN_A input
state B output=WIN_B input
state a output=WIN_A
state b output=WIN_B
symmetric
rule A B -> a b
rule A b -> A a
rule B a -> B b
"""
