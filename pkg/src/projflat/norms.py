"""Degree-1 positively homogeneous origin-data functions.

The metric constructions start from a pair (psi, phi): psi is the norm the
metric restricts to at the origin, phi is the origin value of the
projective factor.  Both live here as members of a closed family set, so
exact values, exact gradients, and analytic continuations to complex
arguments are always available:

* ``zero``        f(y) = 0
* ``euclidean``   f(y) = |y|
* ``scaled``      f(y) = c |y|
* ``randers``     f(y) = |y| + <a, y>
* ``dsr-a``       f(y) = sqrt(2)/2 * sqrt( sqrt(|u|^4 + |v|^4) - |u|^2 )
* ``dsr-b``       f(y) = sqrt(2)/2 * sqrt( sqrt(|u|^4 + |v|^4) + |u|^2 )
                  where u, v are the two coordinate blocks of y
* ``bryant-pair`` the packaged combination phi + i psi = i e^{-i alpha} |y|,
                  i.e. phi = sin(alpha) |y| and psi = cos(alpha) |y|
* ``combo``       a formal linear combination of the above (used for
                  phi +/- psi without numeric differentiation)

Complex continuation uses principal square roots throughout (cut on the
negative real axis, the cut itself resolved from above as in IEEE/numpy).
``bryant-pair`` is the one family whose complex value at a real vector is
genuinely complex; its ``eval_real`` returns the real component
sin(alpha)|y|.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError, SpecParseError
from .sampling import unit_directions
from .verify import STEP_FIRST, VerificationReport, fd_hessian, make_report

MINKOWSKI_EIG_FLOOR = 1e-5


@dataclass(frozen=True)
class HomogeneousFunction:
    """Base class: a positively homogeneous function of degree one on R^n."""

    dimension: int

    family = "abstract"

    def eval_real(self, y) -> float:
        raise NotImplementedError

    def eval_complex(self, z) -> complex:
        raise NotImplementedError

    def grad_real(self, y) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, y) -> float:
        return self.eval_real(y)

    # -- shared input handling -------------------------------------------

    def _vec(self, y, allow_zero=False) -> np.ndarray:
        v = np.asarray(y, dtype=float).reshape(-1)
        if v.size != self.dimension:
            raise DimensionMismatchError(
                f"expected {self.dimension} components, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError("non-finite vector")
        if not allow_zero and not v.any():
            raise DomainError("y = 0 is outside the domain of this family")
        return v

    def _cvec(self, z) -> np.ndarray:
        v = np.asarray(z, dtype=complex).reshape(-1)
        if v.size != self.dimension:
            raise DimensionMismatchError(
                f"expected {self.dimension} components, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError("non-finite vector")
        return v


def _csqrt(w) -> complex:
    """Principal square root as a plain complex number."""
    return complex(cmath.sqrt(complex(w)))


def _csum_sq(v: np.ndarray) -> complex:
    return complex(np.sum(v * v))


class ZeroNorm(HomogeneousFunction):
    """The zero function; the drift-free origin datum."""

    family = "zero"

    def eval_real(self, y) -> float:
        self._vec(y, allow_zero=True)
        return 0.0

    def eval_complex(self, z) -> complex:
        self._cvec(z)
        return 0j

    def grad_real(self, y) -> np.ndarray:
        self._vec(y, allow_zero=True)
        return np.zeros(self.dimension)


class EuclideanNorm(HomogeneousFunction):
    """f(y) = |y|, continued as the principal sqrt of sum(z_k^2)."""

    family = "euclidean"

    def eval_real(self, y) -> float:
        return float(np.linalg.norm(self._vec(y)))

    def eval_complex(self, z) -> complex:
        return _csqrt(_csum_sq(self._cvec(z)))

    def grad_real(self, y) -> np.ndarray:
        v = self._vec(y)
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class ScaledNorm(HomogeneousFunction):
    """f(y) = c |y| for a real constant c (c may be negative or zero)."""

    scale: float = 1.0

    family = "scaled"

    def eval_real(self, y) -> float:
        return self.scale * float(np.linalg.norm(self._vec(y)))

    def eval_complex(self, z) -> complex:
        return self.scale * _csqrt(_csum_sq(self._cvec(z)))

    def grad_real(self, y) -> np.ndarray:
        v = self._vec(y)
        return self.scale * v / np.linalg.norm(v)


@dataclass(frozen=True)
class RandersNorm(HomogeneousFunction):
    """f(y) = |y| + <a, y>; a Minkowski norm iff |a| < 1."""

    drift: tuple = ()

    family = "randers"

    def __post_init__(self):
        if len(self.drift) != self.dimension:
            raise DimensionMismatchError("drift vector length must equal dimension")

    def eval_real(self, y) -> float:
        v = self._vec(y)
        return float(np.linalg.norm(v) + np.dot(self.drift, v))

    def eval_complex(self, z) -> complex:
        v = self._cvec(z)
        return _csqrt(_csum_sq(v)) + complex(np.dot(np.asarray(self.drift), v))

    def grad_real(self, y) -> np.ndarray:
        v = self._vec(y)
        return v / np.linalg.norm(v) + np.asarray(self.drift, dtype=float)


@dataclass(frozen=True)
class DoubleSqrtNorm(HomogeneousFunction):
    """Two-block double-square-root function.

    With u the first ``first_block`` coordinates and v the rest,
    S = sqrt(|u|^4 + |v|^4) and

        f(y) = sqrt((S - |u|^2) / 2)   (minus variant, tag ``dsr-a``)
        f(y) = sqrt((S + |u|^2) / 2)   (plus variant,  tag ``dsr-b``)

    The plus variant is a Minkowski norm; the minus variant vanishes on
    the v = 0 subspace (it is the matching drift datum).  The difference
    S - |u|^2 is evaluated as |v|^4 / (S + |u|^2) to avoid cancellation.
    """

    first_block: int = 1
    second_block: int = 1
    plus: bool = True

    def __post_init__(self):
        if self.first_block < 1 or self.second_block < 1:
            raise DimensionMismatchError("both blocks need at least one coordinate")
        if self.first_block + self.second_block != self.dimension:
            raise DimensionMismatchError("block sizes must sum to the dimension")

    @property
    def family(self) -> str:
        return "dsr-b" if self.plus else "dsr-a"

    def _blocks(self, v):
        return v[: self.first_block], v[self.first_block:]

    def eval_real(self, y) -> float:
        v = self._vec(y)
        u, w = self._blocks(v)
        uu = float(u @ u)
        ww = float(w @ w)
        s = float(np.hypot(uu, ww))
        if self.plus:
            return float(np.sqrt((s + uu) / 2.0))
        # s - uu == ww^2 / (s + uu), exact algebra, no cancellation
        if s + uu == 0.0:
            return 0.0
        return float(np.sqrt(ww * ww / (s + uu) / 2.0))

    def eval_complex(self, z) -> complex:
        # The two components are continued jointly through the conjugate
        # pair h+ = i sqrt(q - i qt), h- = -i sqrt(q + i qt), which keeps
        # the product identity 2 * phi * psi = qt intact; independently
        # chosen principal branches of sqrt((S -+ q)/2) would break it
        # once q leaves the right half plane.
        v = self._cvec(z)
        u, w = self._blocks(v)
        q = _csum_sq(u)
        qt = _csum_sq(w)
        h_plus = 1j * _csqrt(q - 1j * qt)
        h_minus = -1j * _csqrt(q + 1j * qt)
        if self.plus:
            return (h_plus - h_minus) / 2j
        return (h_plus + h_minus) / 2.0

    def grad_real(self, y) -> np.ndarray:
        v = self._vec(y)
        u, w = self._blocks(v)
        uu = float(u @ u)
        ww = float(w @ w)
        s = float(np.hypot(uu, ww))
        out = np.zeros(self.dimension)
        if self.plus:
            val = float(np.sqrt((s + uu) / 2.0))
            d_uu = (uu / s + 1.0) / (4.0 * val)
            d_ww = ww / (4.0 * s * val)
        else:
            # derivatives of sqrt((S - uu)/2) written in cancellation-free form
            root = float(np.sqrt(2.0 * (s + uu)))
            d_uu = -ww * np.sqrt(2.0) / (4.0 * s * np.sqrt(s + uu))
            d_ww = root / (4.0 * s)
        out[: self.first_block] = 2.0 * d_uu * u
        out[self.first_block:] = 2.0 * d_ww * w
        return out


@dataclass(frozen=True)
class BryantPair(HomogeneousFunction):
    """The packaged pair phi + i psi = i e^{-i alpha} |y|, 0 < alpha < pi/2.

    Restricted to real y the components are phi = sin(alpha)|y| and
    psi = cos(alpha)|y|; ``eval_real`` returns phi.  ``eval_complex``
    returns the full packaged value, so this family intentionally has a
    nonzero imaginary part at real arguments.
    """

    angle: float = np.pi / 4.0

    family = "bryant-pair"

    def __post_init__(self):
        if not 0.0 < self.angle < np.pi / 2.0:
            raise SpecParseError("bryant-pair angle must lie in (0, pi/2)")

    def eval_real(self, y) -> float:
        return float(np.sin(self.angle)) * float(np.linalg.norm(self._vec(y)))

    def eval_complex(self, z) -> complex:
        v = self._cvec(z)
        return 1j * cmath.exp(-1j * self.angle) * _csqrt(_csum_sq(v))

    def grad_real(self, y) -> np.ndarray:
        v = self._vec(y)
        return float(np.sin(self.angle)) * v / np.linalg.norm(v)

    @property
    def phi_component(self) -> ScaledNorm:
        return ScaledNorm(self.dimension, float(np.sin(self.angle)))

    @property
    def psi_component(self) -> ScaledNorm:
        return ScaledNorm(self.dimension, float(np.cos(self.angle)))


@dataclass(frozen=True)
class CombinedNorm(HomogeneousFunction):
    """Formal linear combination sum_i c_i f_i of family members.

    Keeps gradients and complex continuations exact for derived data such
    as phi + psi and phi - psi.
    """

    terms: tuple = ()

    family = "combo"

    def __post_init__(self):
        for _, f in self.terms:
            if f.dimension != self.dimension:
                raise DimensionMismatchError("all terms must share the dimension")

    def eval_real(self, y) -> float:
        return float(sum(c * f.eval_real(y) for c, f in self.terms))

    def eval_complex(self, z) -> complex:
        return complex(sum(c * f.eval_complex(z) for c, f in self.terms))

    def grad_real(self, y) -> np.ndarray:
        out = np.zeros(self.dimension)
        for c, f in self.terms:
            out += c * f.grad_real(y)
        return out


def combine(*weighted) -> CombinedNorm:
    """combine((c1, f1), (c2, f2), ...) -> CombinedNorm."""
    dim = weighted[0][1].dimension
    return CombinedNorm(dim, tuple((float(c), f) for c, f in weighted))


# ---------------------------------------------------------------------------
# Minkowski-norm validity


def check_minkowski(f: HomogeneousFunction, samples: int,
                    eig_floor: float = MINKOWSKI_EIG_FLOOR) -> VerificationReport:
    """Strong-convexity and positivity test over deterministic directions.

    At each unit direction the Hessian of f^2/2 is formed by central
    differences (step eps^(1/3), the standard second-difference
    tradeoff) and its minimum eigenvalue recorded.  The per-direction
    residual is max(-lambda_min, -f), so the report passes iff every
    direction has lambda_min >= eig_floor and f >= eig_floor.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    dirs = unit_directions(f.dimension, samples)
    zero = np.zeros(f.dimension)
    residuals = []
    points = []
    min_eig = np.inf
    for u in dirs:
        val = f.eval_real(u)
        hess = fd_hessian(lambda yy: 0.5 * f.eval_real(yy) ** 2, u,
                          STEP_FIRST * max(1.0, float(np.linalg.norm(u))))
        lam = float(np.linalg.eigvalsh(hess).min())
        min_eig = min(min_eig, lam)
        residuals.append(max(-lam, -val))
        points.append((zero, u))
    return make_report("minkowski", points, residuals, tolerance=-eig_floor,
                       extra={"min_eigenvalue": min_eig})


# ---------------------------------------------------------------------------
# descriptor mini-language

# number of ':'-separated parameter tokens each family consumes
NORM_ARITY = {
    "zero": 0,
    "euclidean": 0,
    "scaled": 1,
    "randers": 1,
    "dsr-a": 1,
    "dsr-b": 1,
    "bryant": 1,
}


def parse_norm(text: str, dimension: int) -> HomogeneousFunction:
    """Parse a norm descriptor: ``zero``, ``euclidean``, ``scaled:<c>``,
    ``randers:<a1>,...,<an>``, ``dsr-a:<n>,<m>``, ``dsr-b:<n>,<m>``,
    ``bryant:<alpha>``."""
    parts = text.strip().split(":")
    name = parts[0]
    args = parts[1:]
    if name not in NORM_ARITY:
        raise SpecParseError(f"unknown norm family '{name}'")
    if len(args) != NORM_ARITY[name]:
        raise SpecParseError(f"norm '{name}' takes {NORM_ARITY[name]} parameter group(s)")
    try:
        if name == "zero":
            return ZeroNorm(dimension)
        if name == "euclidean":
            return EuclideanNorm(dimension)
        if name == "scaled":
            return ScaledNorm(dimension, float(args[0]))
        if name == "randers":
            a = tuple(float(v) for v in args[0].split(","))
            if len(a) != dimension:
                raise SpecParseError("randers drift length must equal the dimension")
            return RandersNorm(dimension, a)
        if name in ("dsr-a", "dsr-b"):
            nm = [int(v) for v in args[0].split(",")]
            if len(nm) != 2:
                raise SpecParseError("dsr families take two block sizes")
            if nm[0] + nm[1] != dimension:
                raise SpecParseError("dsr block sizes must sum to the dimension")
            return DoubleSqrtNorm(dimension, nm[0], nm[1], plus=(name == "dsr-b"))
        return BryantPair(dimension, float(args[0]))
    except (ValueError, DimensionMismatchError) as exc:
        raise SpecParseError(f"bad parameters for norm '{name}': {exc}") from exc


def format_norm(f: HomogeneousFunction) -> str:
    """Inverse of parse_norm for the enumerated families."""
    if isinstance(f, ZeroNorm):
        return "zero"
    if isinstance(f, ScaledNorm):
        return f"scaled:{f.scale:g}"
    if isinstance(f, EuclideanNorm):
        return "euclidean"
    if isinstance(f, RandersNorm):
        return "randers:" + ",".join(f"{v:g}" for v in f.drift)
    if isinstance(f, DoubleSqrtNorm):
        return f"{f.family}:{f.first_block},{f.second_block}"
    if isinstance(f, BryantPair):
        return f"bryant:{f.angle:g}"
    if isinstance(f, CombinedNorm):
        return "+".join(f"{c:g}*({format_norm(g)})" for c, g in f.terms)
    raise SpecParseError(f"cannot format {type(f).__name__}")
