"""Suspension hypersurfaces uv = f(z) inside C^2 x C^n.

The ambient coordinate order is (u, v, z1, ..., zn) and the ambient volume
form is the standard one, du dv dz1 ... dzn.  The surface itself is never
given an explicit volume form here: every divergence computation against
the induced form is routed through the ambient divergence and the tangency
multiplier (see `divergence_on_suspension`), which keeps the whole layer
polynomial and exact.

Membership in the ideal generated by the defining polynomial uv - f is
decided by a normal form that rewrites every uv into f until no monomial
contains both u and v.  Because f involves only the z variables the
rewrite terminates, and the surviving monomials u^a z^e / v^b z^e form a
basis of the coordinate ring of the surface, so the normal form is a
canonical representative.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .fields import VectorField, VolumeForm, divergence
from .linalg import ExactMatrix, nullspace, solve_columns
from .poly import Poly, PolyRing
from .scalars import GaussianRational, gr, ONE, ZERO


class SuspensionError(ValueError):
    pass


class NotTangentError(SuspensionError):
    pass


class SamplingError(SuspensionError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


U, V = 0, 1  # ambient indices of the two suspension coordinates


@dataclass(frozen=True)
class SuspensionContext:
    """Everything fixed by the choice of n and f."""

    n: int
    ring: PolyRing
    base_ring: PolyRing
    f: Poly            # in the ambient ring, z variables only
    f_base: Poly       # the same polynomial in the base ring
    defining: Poly     # uv - f
    volume: VolumeForm
    base_volume: VolumeForm
    _f_powers: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def z_indices(self) -> tuple[int, ...]:
        return tuple(range(2, self.n + 2))

    def f_power(self, k: int) -> Poly:
        got = self._f_powers.get(k)
        if got is None:
            got = self.f ** k
            self._f_powers[k] = got
        return got

    # -- normal form -------------------------------------------------------

    def normal_form(self, p: Poly) -> Poly:
        """Canonical representative of p modulo (uv - f)."""
        if p.ring.variables != self.ring.variables:
            raise SuspensionError("polynomial lives in the wrong ring")
        out = self.ring.zero()
        for e, c in p.terms.items():
            k = min(e[U], e[V])
            if k == 0:
                out = out + self.ring.monomial(e, c)
            else:
                d = list(e)
                d[U] -= k
                d[V] -= k
                out = out + self.ring.monomial(d, c) * self.f_power(k)
        return out

    def reduce(self, p: Poly) -> tuple[Poly, Poly]:
        """Normal form together with the cofactor: p = q*(uv - f) + nf(p).

        Single-step rewriting; each pass trades one uv for one f, so the
        loop terminates and the cofactor is exact.
        """
        if p.ring.variables != self.ring.variables:
            raise SuspensionError("polynomial lives in the wrong ring")
        quotient = self.ring.zero()
        current = p
        while True:
            step = self.ring.zero()
            rest = self.ring.zero()
            for e, c in current.terms.items():
                if e[U] >= 1 and e[V] >= 1:
                    d = list(e)
                    d[U] -= 1
                    d[V] -= 1
                    step = step + self.ring.monomial(d, c)
                else:
                    rest = rest + self.ring.monomial(e, c)
            if step.is_zero:
                return current, quotient
            quotient = quotient + step
            current = rest + step * self.f

    def in_surface_ideal(self, p: Poly) -> bool:
        return self.normal_form(p).is_zero

    # -- conversions -------------------------------------------------------

    def from_base(self, p: Poly) -> Poly:
        """Trivial extension of a base-ring polynomial to the ambient ring."""
        return p.extend_to(self.ring)

    def to_base(self, p: Poly) -> Poly:
        return p.restrict_to(self.base_ring)

    def parse(self, text: str) -> Poly:
        return self.ring.parse(text)

    def parse_base(self, text: str) -> Poly:
        return self.base_ring.parse(text)

    # -- pointwise data ----------------------------------------------------

    def defining_gradient_exact(self, coords) -> list[GaussianRational]:
        z = list(coords[2:])
        grad = [coords[V], coords[U]]
        for j in self.z_indices:
            grad.append(-self.f.derivative(j).evaluate_exact(coords))
        return grad

    def defining_gradient_complex(self, coords) -> list[complex]:
        grad = [complex(coords[V]), complex(coords[U])]
        for j in self.z_indices:
            grad.append(-self.f.derivative(j).evaluate_complex(coords))
        return grad


def make_suspension(n: int, f) -> SuspensionContext:
    """Build the context for uv = f(z1..zn).  f may be polynomial text."""
    if n < 1:
        raise SuspensionError("base dimension must be at least 1")
    names = ("u", "v") + tuple(f"z{j}" for j in range(1, n + 1))
    ring = PolyRing(names)
    base_ring = PolyRing(names[2:])
    if isinstance(f, str):
        f_base = base_ring.parse(f)
    elif isinstance(f, Poly):
        f_base = f.restrict_to(base_ring) if f.ring.variables != base_ring.variables else f
    else:
        raise SuspensionError("f must be polynomial text or a Poly")
    if f_base.is_constant():
        raise SuspensionError("f must be nonconstant")
    f_amb = f_base.extend_to(ring)
    defining = ring.var("u") * ring.var("v") - f_amb
    return SuspensionContext(
        n=n, ring=ring, base_ring=base_ring, f=f_amb, f_base=f_base,
        defining=defining, volume=VolumeForm.standard(ring),
        base_volume=VolumeForm.standard(base_ring))


# ---------------------------------------------------------------------------
# tangent fields


@dataclass(frozen=True)
class SuspensionField:
    """An ambient field tangent to the surface, with the certified
    multiplier q from  field(uv - f) = q * (uv - f)."""

    ambient: VectorField
    multiplier: Poly

    def evaluate_exact(self, point: "SurfacePoint"):
        return self.ambient.evaluate_exact(point.coords)

    def evaluate_complex(self, point: "SurfacePoint"):
        return self.ambient.evaluate_complex(point.complex_coords())

    def scale(self, h: Poly) -> "SuspensionField":
        return SuspensionField(self.ambient.scale(h), self.multiplier * h)


def is_tangent(theta: VectorField, ctx: SuspensionContext) -> Poly:
    """Tangency multiplier of an ambient field, or NotTangentError."""
    if theta.ring.variables != ctx.ring.variables:
        raise SuspensionError("field lives in the wrong ring")
    value = theta.apply(ctx.defining)
    nf, q = ctx.reduce(value)
    if not nf.is_zero:
        raise NotTangentError(
            f"field is not tangent: residue {nf} off the surface ideal")
    return q


def tangent_field(theta: VectorField, ctx: SuspensionContext) -> SuspensionField:
    return SuspensionField(theta, is_tangent(theta, ctx))


def divergence_on_suspension(sf: SuspensionField, ctx: SuspensionContext) -> Poly:
    """Divergence against the induced volume form on the surface, as the
    normal form of (ambient divergence - tangency multiplier).

    The induced form is characterised by wedging with d(uv - f) to give
    the ambient volume; the correction term below is exactly what that
    characterisation forces for a tangent field, so no explicit surface
    volume form is ever materialised.
    """
    amb = divergence(sf.ambient, ctx.volume)
    return ctx.normal_form(amb - sf.multiplier)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class SurfacePoint:
    """A point of the surface; exact (Gaussian rational) or floating."""

    coords: tuple
    exact: bool

    @property
    def u(self):
        return self.coords[U]

    @property
    def v(self):
        return self.coords[V]

    @property
    def z(self) -> tuple:
        return self.coords[2:]

    def complex_coords(self) -> tuple[complex, ...]:
        if self.exact:
            return tuple(c.to_complex() for c in self.coords)
        return tuple(complex(c) for c in self.coords)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


FLOAT_RESIDUAL_TOL = 1e-12


def surface_point(ctx: SuspensionContext, coords: Sequence,
                  tol: float = FLOAT_RESIDUAL_TOL) -> SurfacePoint:
    """Validate and wrap coordinates as a point of the surface."""
    coords = tuple(coords)
    if len(coords) != ctx.ring.nvars:
        raise SuspensionError("wrong number of coordinates")
    if all(isinstance(c, GaussianRational) for c in coords):
        if not ctx.defining.evaluate_exact(coords).is_zero:
            raise SuspensionError(f"exact point is off the surface: {coords}")
        return SurfacePoint(coords, True)
    cc = tuple(complex(c) for c in coords)
    residual = abs(ctx.defining.evaluate_complex(cc))
    if residual > tol:
        raise SuspensionError(
            f"float point residual {residual:.3e} exceeds {tol:.1e}")
    return SurfacePoint(cc, False)


def tangent_basis(ctx: SuspensionContext, point: SurfacePoint) -> list[list[GaussianRational]]:
    """Exact basis of the kernel of d(uv - f) at an exact point."""
    if not point.exact:
        raise SuspensionError("exact tangent bases need exact points")
    grad = ctx.defining_gradient_exact(point.coords)
    if all(g.is_zero for g in grad):
        raise SuspensionError("singular point: the defining gradient vanishes")
    basis = nullspace(ExactMatrix([grad]))
    return basis


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplingSpec:
    count: int = 20
    seed: int = 0
    region: tuple[Fraction, Fraction] = (Fraction(-2), Fraction(2))
    exactness: str = "exact"            # "exact" | "float"
    denominator_bound: int = 3
    imaginary: bool = True
    max_attempts: int = 10000


def _rand_rational(rng: random.Random, lo: Fraction, hi: Fraction,
                   denominator_bound: int) -> Fraction:
    d = rng.randint(1, denominator_bound)
    a = rng.randint(int(lo * d), int(hi * d))
    return Fraction(a, d)


def _rand_exact_scalar(rng: random.Random, spec: SamplingSpec) -> GaussianRational:
    lo, hi = spec.region
    re = _rand_rational(rng, lo, hi, spec.denominator_bound)
    im = _rand_rational(rng, lo, hi, spec.denominator_bound) if spec.imaginary else Fraction(0)
    return gr(re, im)


def _rand_float_scalar(rng: random.Random, spec: SamplingSpec) -> complex:
    lo, hi = float(spec.region[0]), float(spec.region[1])
    im = rng.uniform(lo, hi) if spec.imaginary else 0.0
    return complex(rng.uniform(lo, hi), im)


def sample_points(ctx: SuspensionContext, spec: SamplingSpec) -> list[SurfacePoint]:
    """Seeded draws on the chart u != 0: pick z and u, then v = f(z)/u.

    Points satisfy the surface equation exactly in exact mode and to
    floating accuracy otherwise; sampling is pure given the seed.
    """
    rng = random.Random(spec.seed)
    out: list[SurfacePoint] = []
    attempts = 0
    while len(out) < spec.count:
        attempts += 1
        if attempts > spec.max_attempts:
            raise SamplingError(f"exhausted {spec.max_attempts} sampling attempts")
        if spec.exactness == "exact":
            z = [_rand_exact_scalar(rng, spec) for _ in range(ctx.n)]
            u = _rand_exact_scalar(rng, spec)
            if u.is_zero:
                continue
            fz = ctx.f_base.evaluate_exact(z)
            v = fz / u
            out.append(surface_point(ctx, (u, v, *z)))
        elif spec.exactness == "float":
            z = [_rand_float_scalar(rng, spec) for _ in range(ctx.n)]
            u = _rand_float_scalar(rng, spec)
            if abs(u) < 0.25:
                continue
            fz = ctx.f_base.evaluate_complex(z)
            v = fz / u
            out.append(surface_point(ctx, (u, v, *z)))
        else:
            raise SuspensionError(f"unknown exactness mode {spec.exactness!r}")
    return out


def sample_zero_fiber(ctx: SuspensionContext, spec: SamplingSpec,
                      grid_step: Fraction = Fraction(1, 2)) -> list[SurfacePoint]:
    """Points with u = 0, found by scanning a rational grid for zeros of f.

    Only real-rational grid nodes are scanned; this is a best-effort
    helper for the chart the generic sampler cannot reach.
    """
    lo, hi = spec.region
    values: list[Fraction] = []
    x = lo
    while x <= hi:
        values.append(Fraction(x))
        x += grid_step
    rng = random.Random(spec.seed + 1)
    out: list[SurfacePoint] = []

    def scan(prefix: list[Fraction]):
        if len(out) >= spec.count:
            return
        if len(prefix) == ctx.n:
            z = [gr(c) for c in prefix]
            if ctx.f_base.evaluate_exact(z).is_zero:
                v = _rand_exact_scalar(rng, spec)
                out.append(surface_point(ctx, (ZERO, v, *z)))
            return
        for c in values:
            scan(prefix + [c])

    scan([])
    return out


# ---------------------------------------------------------------------------
# smoothness reporting


@dataclass
class SmoothnessReport:
    checked: int
    zero_fiber: int
    singular_points: list
    certificate: dict | None = None

    @property
    def ok(self) -> bool:
        return not self.singular_points


def smoothness_witness(ctx: SuspensionContext, z_samples: Sequence,
                       certificate_degree: int | None = None) -> SmoothnessReport:
    """Check d f != 0 at every sampled zero of f; optionally search for an
    exact combination  g0*f + sum_j gj*df/dzj = 1  up to a degree bound,
    which certifies smoothness everywhere rather than just on samples."""
    partials = [ctx.f_base.derivative(j) for j in range(ctx.n)]
    singular = []
    zero_count = 0
    for z in z_samples:
        if not ctx.f_base.evaluate_exact(z).is_zero:
            continue
        zero_count += 1
        if all(p.evaluate_exact(z).is_zero for p in partials):
            singular.append(tuple(z))
    cert = None
    if certificate_degree is not None:
        cert = smoothness_certificate(ctx, certificate_degree)
    return SmoothnessReport(checked=len(list(z_samples)), zero_fiber=zero_count,
                            singular_points=singular, certificate=cert)


def smoothness_certificate(ctx: SuspensionContext, degree_bound: int) -> dict | None:
    """Exact cofactors writing 1 as a combination of f and its partials,
    with cofactor degree <= degree_bound; None if none exists at this bound."""
    ring = ctx.base_ring
    factors = [ctx.f_base] + [ctx.f_base.derivative(j) for j in range(ctx.n)]
    monomials = list(ring.exponents_up_to(degree_bound))
    columns: list[Poly] = []
    labels: list[tuple[int, tuple[int, ...]]] = []
    for fi, factor in enumerate(factors):
        for e in monomials:
            columns.append(ring.monomial(e) * factor)
            labels.append((fi, e))
    support = sorted({e for col in columns for e in col.terms} | {(0,) * ctx.n})
    row_of = {e: i for i, e in enumerate(support)}
    matrix = ExactMatrix([[ZERO] * len(columns) for _ in support])
    for j, col in enumerate(columns):
        for e, c in col.terms.items():
            matrix.entries[row_of[e]][j] = c
    target = [ZERO] * len(support)
    target[row_of[(0,) * ctx.n]] = ONE
    sol = solve_columns(matrix, [target])[0]
    if sol is None:
        return None
    cofactors = [ring.zero() for _ in factors]
    for (fi, e), c in zip(labels, sol):
        if not c.is_zero:
            cofactors[fi] = cofactors[fi] + ring.monomial(e, c)
    return {"f": cofactors[0],
            "partials": cofactors[1:],
            "degree_bound": degree_bound}


# ---------------------------------------------------------------------------
# basepoint search with per-condition reporting


@dataclass
class RejectionReport:
    attempts: int = 0
    rejected: dict = field(default_factory=dict)

    def reject(self, condition: str):
        self.rejected[condition] = self.rejected.get(condition, 0) + 1


def basepoint_search(ctx: SuspensionContext, spec: SamplingSpec,
                     ideals: Sequence[Sequence[Poly]] = (),
                     rng: random.Random | None = None,
                     count: int = 1) -> tuple[list[SurfacePoint], RejectionReport]:
    """Rejection-sample exact points satisfying the spanning-construction
    preconditions: u != 0, v != 0, df nonzero at z, and every proposed
    ideal nonvanishing at z.  Each rejection is recorded by condition."""
    rng = rng or random.Random(spec.seed)
    partials = [ctx.f_base.derivative(j) for j in range(ctx.n)]
    report = RejectionReport()
    found: list[SurfacePoint] = []
    while len(found) < count:
        report.attempts += 1
        if report.attempts > spec.max_attempts:
            raise SamplingError(
                f"no admissible basepoint in {spec.max_attempts} attempts; "
                f"rejections: {report.rejected}", report)
        z = [_rand_exact_scalar(rng, spec) for _ in range(ctx.n)]
        u = _rand_exact_scalar(rng, spec)
        if u.is_zero:
            report.reject("u_nonzero")
            continue
        fz = ctx.f_base.evaluate_exact(z)
        if fz.is_zero:
            report.reject("v_nonzero")
            continue
        if all(p.evaluate_exact(z).is_zero for p in partials):
            report.reject("df_nonzero")
            continue
        bad_ideal = None
        for k, gens in enumerate(ideals):
            if gens and all(g.evaluate_exact(z).is_zero for g in gens):
                bad_ideal = k
                break
        if bad_ideal is not None:
            report.reject(f"ideal_{bad_ideal}_nonzero")
            continue
        found.append(surface_point(ctx, (u, fz / u, *z)))
    return found, report
