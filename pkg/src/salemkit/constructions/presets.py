"""Constant tables behind the two presets.

`paper-constants` uses the constants of the original construction, which only
become admissible at very large scales.  `desk-scale` shrinks the multipliers
while keeping every structural identity and divisibility relation; builders
re-check the inequalities they rely on at the realized values.  Any key in a
parameter document's `overrides` replaces the preset value.
"""
from fractions import Fraction


def _original(name, d, r):
    if name == "geo-factorization":
        return {"mt_coef": Fraction(1), "q_coef": Fraction(1, (100 * r) ** 2),
                "Q_coef": Fraction(r * r), "T_coef": Fraction((r + 1) ** d),
                "b_coef": Fraction(1, 2 * r), "M0": 1000}
    if name == "restriction-geo":
        A, B = 10, 100 * r * (r + 1)
        return {"A": A, "B": B, "mt_coef": Fraction(2), "mb_coef": Fraction(1, 2),
                "q_coef": Fraction(1, A * B), "T_coef": Fraction((r + 1) ** d),
                "R0": 1000, "R_step": 1}
    if name == "heavy-core":
        return {"level_offset": 0}
    if name == "restriction-nongeo":
        return {"component_offset": 0, "weight_decay": "n^-2 2^(-beta n)"}
    return {"level_offset": 0}


def _desk(name, d, r):
    if name == "geo-factorization":
        return {"mt_coef": Fraction(1), "q_coef": Fraction(1, 2), "Q_coef": Fraction(2),
                "T_coef": Fraction(1), "b_coef": Fraction(1, 2), "M0": 100}
    if name == "restriction-geo":
        return {"A": 4, "B": 2 * r, "mt_coef": Fraction(1, 2), "mb_coef": Fraction(3, 2),
                "q_coef": Fraction(1, 2), "T_coef": Fraction(1),
                "R0": 30, "R_step": 30}
    if name == "heavy-core":
        return {"level_offset": "auto"}
    if name == "restriction-nongeo":
        # components 3.. so the resonance box holds several residue windows
        return {"component_offset": 2, "weight_decay": "2^(-beta n)"}
    return {"level_offset": 0}


def preset_constants(preset, name, d, r):
    table = _original if preset == "paper-constants" else _desk
    return table(name, d, r)


def resolve_overrides(params, name=None):
    """Preset constants for the construction, updated by the document's overrides."""
    name = name or params.construction
    out = preset_constants(params.preset, name, params.d, params.r)
    out.update(params.overrides)
    return out
