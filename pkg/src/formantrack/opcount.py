"""Arithmetic operation tally used for the complexity comparison."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class OpCount:
    """Running count of multiplies, adds (incl. subtractions) and divides.

    One instance belongs to one run; do not share it between threads.
    """

    mults: int = 0
    adds: int = 0
    divs: int = 0

    def add(self, mults: int = 0, adds: int = 0, divs: int = 0) -> None:
        if mults < 0 or adds < 0 or divs < 0:
            raise ValueError("operation counts only grow")
        self.mults += mults
        self.adds += adds
        self.divs += divs

    def total(self) -> int:
        return self.mults + self.adds + self.divs

    def __iadd__(self, other: "OpCount"):
        self.add(other.mults, other.adds, other.divs)
        return self

    def as_dict(self) -> dict:
        return {"mults": self.mults, "adds": self.adds, "divs": self.divs, "total": self.total()}
