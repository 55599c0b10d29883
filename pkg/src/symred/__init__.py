"""Permutations under the normalized Hamming metric: cutting and lifting,
reduced-product stages, stability of near-conjugations, involution classes
and almost rearrangements of degree sequences."""
from .cut_lift import cut, cut_hom_bound, lift, roundtrip_bound, updown
from .perm import (
    HammingValue,
    Permutation,
    compose,
    conjugate,
    cycle_type,
    hamming,
    identity,
    inverse,
)

__version__ = "0.1.0"

__all__ = [
    "HammingValue",
    "Permutation",
    "compose",
    "conjugate",
    "cut",
    "cut_hom_bound",
    "cycle_type",
    "hamming",
    "identity",
    "inverse",
    "lift",
    "roundtrip_bound",
    "updown",
]
