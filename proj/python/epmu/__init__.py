"""Epistemic mu-calculus model checking over system unfoldings.

Systems are passed as the text of a system file, formulas as strings.
"""

from ._epmu import (
    CapacityExceeded,
    Error,
    FormulaSyntaxError,
    FragmentRejected,
    InvalidSystem,
    analyze,
    check,
    distinction,
    normalize,
    oracle,
    positive_form,
    translate_atl_until,
    translate_parity,
)

__all__ = [
    "CapacityExceeded",
    "Error",
    "FormulaSyntaxError",
    "FragmentRejected",
    "InvalidSystem",
    "analyze",
    "check",
    "distinction",
    "normalize",
    "oracle",
    "positive_form",
    "translate_atl_until",
    "translate_parity",
]
