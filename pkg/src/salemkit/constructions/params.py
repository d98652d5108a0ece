"""Parameter documents for the constructions and their validation."""
import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import InvalidParameters, InvalidS, ParseError
from ..exact import as_fraction

CONSTRUCTIONS = ("salem", "heavy-core", "geo-factorization", "restriction-geo", "restriction-nongeo")
PRESETS = ("paper-constants", "desk-scale")


def _frac_text(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _json_value(v):
    if isinstance(v, Fraction):
        return _frac_text(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in sorted(v.items())}
    return v


@dataclass(frozen=True)
class ConstructionParams:
    construction: str
    d: int
    r: int
    alpha: Fraction
    depth: int
    seed: int = 0
    beta: Fraction | None = None
    s: Fraction | None = None
    schedule: tuple | None = None
    overrides: dict = field(default_factory=dict)
    preset: str = "desk-scale"

    @classmethod
    def from_dict(cls, doc, seed=None, preset=None):
        try:
            name = doc["construction"]
            d = int(doc["d"])
            r = int(doc.get("r", 2))
            alpha = as_fraction(doc["alpha"])
            depth = int(doc.get("depth", 3))
        except KeyError as exc:
            raise ParseError(f"parameter document lacks key {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed parameter value: {exc}") from exc
        beta = doc.get("beta")
        s = doc.get("s")
        sched = doc.get("schedule")
        over = {k: as_fraction(v) if isinstance(v, (int, float, str)) else v
                for k, v in (doc.get("overrides") or {}).items()}
        params = cls(
            construction=name, d=d, r=r, alpha=alpha, depth=depth,
            seed=int(seed if seed is not None else doc.get("seed", 0)),
            beta=None if beta is None else as_fraction(beta),
            s=None if s is None else as_fraction(s),
            schedule=None if sched is None else tuple(int(m) for m in sched),
            overrides=over,
            preset=preset or doc.get("preset", "desk-scale"),
        )
        params.validate()
        return params

    @classmethod
    def from_json(cls, text, seed=None, preset=None):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"parameter document is not valid JSON: {exc}") from exc
        return cls.from_dict(doc, seed=seed, preset=preset)

    def to_dict(self):
        out = {
            "construction": self.construction, "d": self.d, "r": self.r,
            "alpha": _frac_text(self.alpha), "depth": self.depth, "seed": self.seed,
            "preset": self.preset,
        }
        if self.beta is not None:
            out["beta"] = _frac_text(self.beta)
        if self.s is not None:
            out["s"] = _frac_text(self.s)
        if self.schedule is not None:
            out["schedule"] = list(self.schedule)
        out["overrides"] = _json_value(dict(self.overrides))
        return out

    def with_changes(self, **kw):
        doc = self.to_dict()
        doc.update(kw)
        return ConstructionParams.from_dict(doc)

    def validate(self):
        if self.construction not in CONSTRUCTIONS:
            raise InvalidParameters(f"unknown construction {self.construction!r}; choose from {CONSTRUCTIONS}")
        if self.preset not in PRESETS:
            raise InvalidParameters(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        d, a, b = self.d, self.alpha, self.beta
        if d < 1 or self.depth < 1:
            raise InvalidParameters("need d >= 1 and depth >= 1")
        if not 0 < a < d:
            raise InvalidParameters(f"alpha={a} must lie in (0, d)")
        needs_beta = self.construction != "salem"
        if needs_beta:
            if b is None:
                raise InvalidParameters(f"{self.construction} needs beta")
            if not 0 < b <= d:
                raise InvalidParameters(f"beta={b} must lie in (0, d]")
            if b / 2 > a:
                raise InvalidParameters(f"exponent pair violates beta/2 <= alpha (alpha={a}, beta={b})")
        top = max([Fraction(1), a / 2] + ([b / 2] if b is not None else []))
        if not self.r > top:
            raise InvalidParameters(f"digit order r={self.r} must exceed max(1, alpha/2, beta/2)")
        c = self.construction
        if c == "heavy-core":
            if not a < b < d:
                raise InvalidParameters(f"heavy core needs alpha < beta < d (alpha={a}, beta={b})")
            s = self.s if self.s is not None else 2 * a - b
            if not 0 <= s <= 2 * a - b:
                raise InvalidS(f"s={s} outside [0, 2 alpha - beta] = [0, {2 * a - b}]")
        if c in ("geo-factorization", "restriction-geo") and not b <= a:
            raise InvalidParameters(f"{c} needs beta <= alpha (alpha={a}, beta={b})")
        if c == "restriction-nongeo" and not a < b:
            raise InvalidParameters(f"restriction-nongeo needs alpha < beta (alpha={a}, beta={b})")
        return True

    @property
    def core_exponent(self):
        if self.s is not None:
            return self.s
        return 2 * self.alpha - self.beta
