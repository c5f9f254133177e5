# src/data/netlist_reader/characteristic_reader.py

from typing import List, Tuple

from src.core.errors import CharacteristicError
from src.core.models.characteristic import Characteristic


def parse_characteristic(text: str) -> Characteristic:
    """
    Parse the "D:alpha[,D:alpha...]" form shared by the .f directive and the
    CLI --f flag. Duplicate exponents are merged.
    """
    terms: List[Tuple[float, float]] = []
    chunks = [c.strip() for c in text.strip().split(",")]
    if not text.strip() or any(not c for c in chunks):
        raise CharacteristicError(f"empty term in characteristic {text!r}")
    for chunk in chunks:
        parts = chunk.split(":")
        if len(parts) != 2:
            raise CharacteristicError(f"term {chunk!r} is not of the form D:alpha")
        try:
            coeff, alpha = float(parts[0]), float(parts[1])
        except ValueError:
            raise CharacteristicError(f"term {chunk!r} has a non-numeric D or alpha")
        terms.append((coeff, alpha))
    return Characteristic.from_terms(terms)


def format_characteristic(f: Characteristic) -> str:
    return ",".join(f"{coeff!r}:{alpha!r}" for coeff, alpha in f.terms)
