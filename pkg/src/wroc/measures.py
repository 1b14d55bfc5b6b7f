"""Weight measures on the false-positive-rate axis.

A weighted AUC is the integral of the empirical ROC curve against a finite
measure W on (0, 1).  Four measure shapes are supported:

* ``full``   Lebesgue measure on (0, 1); the plain AUC.
* ``pauc``   Lebesgue measure restricted to (lower, upper).  Kept
             unnormalized by default, so the estimand has mass
             ``upper - lower``.
* ``point``  unit point mass at a single false-positive rate; the wAUC is
             then the sensitivity at that rate.
* ``steps``  a finite sum of point masses.

The ``normalized`` flag divides estimates by ``total_mass`` (and covariances
by its square) for callers who want the probability-measure convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DataFormatError

_FPR_KINDS = ("full", "pauc", "point", "steps")


@dataclass(frozen=True)
class WeightMeasure:
    kind: str
    lower: float = 0.0
    upper: float = 1.0
    atoms: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in _FPR_KINDS:
            raise ValueError(f"unknown weight measure kind: {self.kind!r}")
        if self.kind == "pauc":
            if not (0.0 <= self.lower < self.upper <= 1.0):
                raise ValueError(
                    f"partial-AUC window must satisfy 0 <= lower < upper <= 1, "
                    f"got ({self.lower}, {self.upper})"
                )
        if self.kind in ("point", "steps"):
            if not self.atoms:
                raise ValueError("atomic measure needs at least one atom")
            for u, mass in self.atoms:
                if not 0.0 < u < 1.0:
                    raise ValueError(f"atom location {u} outside (0, 1)")
                if mass <= 0.0:
                    raise ValueError(f"atom mass {mass} must be positive")
            # canonical order makes reports and covariance grids deterministic
            object.__setattr__(self, "atoms", tuple(sorted(self.atoms)))

    # -- constructors ----------------------------------------------------

    @classmethod
    def full_auc(cls) -> "WeightMeasure":
        return cls(kind="full")

    @classmethod
    def partial_auc(cls, lower: float, upper: float, normalized: bool = False) -> "WeightMeasure":
        return cls(kind="pauc", lower=float(lower), upper=float(upper), normalized=normalized)

    @classmethod
    def point_mass(cls, at: float) -> "WeightMeasure":
        return cls(kind="point", atoms=((float(at), 1.0),))

    @classmethod
    def steps(cls, atoms, normalized: bool = False) -> "WeightMeasure":
        return cls(
            kind="steps",
            atoms=tuple((float(u), float(m)) for u, m in atoms),
            normalized=normalized,
        )

    # -- properties ------------------------------------------------------

    @property
    def total_mass(self) -> float:
        if self.kind == "full":
            return 1.0
        if self.kind == "pauc":
            return self.upper - self.lower
        return sum(m for _, m in self.atoms)

    @property
    def is_atomic(self) -> bool:
        return self.kind in ("point", "steps")

    def selector(self) -> str:
        """Round-trippable text form, the same grammar ``parse_measure`` reads."""
        if self.kind == "full":
            return "auc"
        if self.kind == "pauc":
            text = f"pauc:{self.lower:g},{self.upper:g}"
            return text + ":normalized" if self.normalized else text
        if self.kind == "point":
            return f"sens:{self.atoms[0][0]:g}"
        return "steps:" + ",".join(f"{u:g}={m:g}" for u, m in self.atoms)


def parse_measure(text: str) -> WeightMeasure:
    """Parse a measure selector.

    Grammar: ``auc`` | ``pauc:<u1>,<u2>[:normalized]`` | ``sens:<u0>`` |
    ``steps:<u1>=<m1>,<u2>=<m2>,...``.
    """
    token = text.strip()
    try:
        if token == "auc":
            return WeightMeasure.full_auc()
        if token.startswith("pauc:"):
            rest = token[len("pauc:"):]
            normalized = False
            if rest.endswith(":normalized"):
                normalized = True
                rest = rest[: -len(":normalized")]
            lo_text, hi_text = rest.split(",")
            return WeightMeasure.partial_auc(float(lo_text), float(hi_text), normalized)
        if token.startswith("sens:"):
            return WeightMeasure.point_mass(float(token[len("sens:"):]))
        if token.startswith("steps:"):
            atoms = []
            for part in token[len("steps:"):].split(","):
                u_text, m_text = part.split("=")
                atoms.append((float(u_text), float(m_text)))
            return WeightMeasure.steps(atoms)
    except DataFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise DataFormatError(f"bad measure selector {text!r}: {exc}") from exc
    raise DataFormatError(f"unknown measure selector {text!r}")
