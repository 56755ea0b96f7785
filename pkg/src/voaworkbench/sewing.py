"""Two-sphere epsilon-sewing geometry: domain validation, the pinch
relation, Moebius data, and coincident-parameter detection.

Points are exact Gaussian rationals (re, im); every inequality is decided
on squared moduli so nothing leaves exact arithmetic. The square root of
epsilon is a formal symbol (lambda is only ever used through lambda^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q

__all__ = [
    "CPoint",
    "SewingConfig",
    "MobiusConjugator",
    "validate",
    "pinch",
    "mobius_lambda",
    "detect_coincident",
    "config_from_toml",
]


class CPoint:
    """Exact complex-rational point."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Q(re)
        self.im = Q(im)

    @classmethod
    def parse(cls, obj) -> "CPoint":
        if isinstance(obj, (list, tuple)):
            return cls(Q(str(obj[0])), Q(str(obj[1])))
        return cls(Q(str(obj)))

    def abs2(self) -> Q:
        return self.re * self.re + self.im * self.im

    def __eq__(self, other):
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"CPoint({self.re}, {self.im})" if self.im else f"CPoint({self.re})"


@dataclass
class SewingConfig:
    r1: Q
    r2: Q
    eps: Q
    xs: list = field(default_factory=list)  # points on sphere 1
    ys: list = field(default_factory=list)  # points on sphere 2

    def __post_init__(self):
        self.r1 = Q(self.r1)
        self.r2 = Q(self.r2)
        self.eps = Q(self.eps)
        self.xs = [p if isinstance(p, CPoint) else CPoint.parse(p) for p in self.xs]
        self.ys = [p if isinstance(p, CPoint) else CPoint.parse(p) for p in self.ys]


def validate(config: SewingConfig) -> dict:
    """Check every sewing-domain inequality with exact arithmetic.

    |eps| <= r1 r2; |x_i| >= |eps|/r2; |y_j| >= |eps|/r1; annuli nonempty
    (|eps|/r_abar <= r_a, bar 1 = 2)."""
    violations = []
    if config.r1 <= 0 or config.r2 <= 0:
        violations.append("radii must be positive")
    aeps = abs(config.eps)
    if aeps > config.r1 * config.r2:
        violations.append(f"|eps| = {aeps} > r1 r2 = {config.r1 * config.r2}")
    # annulus |eps|/r_abar <= |zeta_a| <= r_a nonempty
    if aeps / config.r2 > config.r1:
        violations.append("annulus on sphere 1 empty: |eps|/r2 > r1")
    if aeps / config.r1 > config.r2:
        violations.append("annulus on sphere 2 empty: |eps|/r1 > r2")
    # squared-modulus comparisons for the points
    for i, p in enumerate(config.xs):
        if p.abs2() * config.r2**2 < aeps**2:
            violations.append(f"|x{i + 1}| >= |eps|/r2 violated")
    for j, p in enumerate(config.ys):
        if p.abs2() * config.r1**2 < aeps**2:
            violations.append(f"|y{j + 1}| >= |eps|/r1 violated")
    seen = set()
    for i, p in enumerate(config.xs):
        if p in seen:
            violations.append(f"x{i + 1} repeats a sphere-1 point")
        seen.add(p)
    seen = set()
    for j, p in enumerate(config.ys):
        if p in seen:
            violations.append(f"y{j + 1} repeats a sphere-2 point")
        seen.add(p)
    return {"valid": not violations, "violations": violations}


def pinch(zeta1: Q, eps: Q) -> Q:
    """zeta_2 = eps / zeta_1 (the sewing relation zeta_1 zeta_2 = eps)."""
    zeta1 = Q(zeta1)
    if zeta1 == 0:
        raise ZeroDivisionError("pinch needs zeta_1 != 0")
    return Q(eps) / zeta1


class MobiusConjugator:
    """lambda = -xi eps^{1/2} with xi in {+i, -i}; lambda enters only through
    lambda^2 = -eps, so the square root stays formal."""

    __slots__ = ("eps", "xi_sign")

    def __init__(self, eps, xi_sign: int = 1):
        self.eps = Q(eps)
        if xi_sign not in (1, -1):
            raise ValueError("xi is +sqrt(-1) or -sqrt(-1)")
        self.xi_sign = xi_sign

    @property
    def lambda_squared(self) -> Q:
        # lambda^2 = xi^2 eps = -eps independently of the xi branch
        return -self.eps

    def map(self, z) -> Q:
        """z -> -lambda^2 / z = eps / z."""
        z = Q(z)
        if z == 0:
            raise ZeroDivisionError("Moebius map pole at z = 0")
        return -self.lambda_squared / z

    def flip_xi(self) -> "MobiusConjugator":
        return MobiusConjugator(self.eps, -self.xi_sign)


def mobius_lambda(eps, xi_sign: int = 1) -> MobiusConjugator:
    return MobiusConjugator(eps, xi_sign)


def detect_coincident(config: SewingConfig):
    """Exact equality scan producing the ExclusionList pairs (i, j) with
    x_i = y_j; repeated points within one sphere are malformed input."""
    from .eproduct import ExclusionList

    for pts, name in ((config.xs, "sphere 1"), (config.ys, "sphere 2")):
        if len(set(pts)) != len(pts):
            raise ValueError(f"repeated points on {name}: configuration space requires distinct points")
    pairs = []
    used_j = set()
    for i, x in enumerate(config.xs, start=1):
        for j, y in enumerate(config.ys, start=1):
            if x == y:
                if j in used_j or any(i == i0 for i0, _ in pairs):
                    raise ValueError("a point paired twice")
                pairs.append((i, j))
                used_j.add(j)
    return ExclusionList(pairs=pairs, t=0)


def config_from_toml(path: str) -> SewingConfig:
    try:
        import tomllib as toml
    except ModuleNotFoundError:
        import tomli as toml
    with open(path, "rb") as fh:
        data = toml.load(fh)
    return SewingConfig(
        r1=Q(str(data["r1"])),
        r2=Q(str(data["r2"])),
        eps=Q(str(data["epsilon"])),
        xs=[CPoint.parse(p) for p in data.get("x", [])],
        ys=[CPoint.parse(p) for p in data.get("y", [])],
    )
