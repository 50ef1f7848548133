"""Semi-compatibility certificates and the assembled criterion runner.

A pair of volume-preserving fields is certified here in a degree-truncated
sense: up to a degree bound D, every product of a proposed ideal generator
with a monomial must be an exact linear combination of products a*b with a
from the multiplicative closure of one kernel and b from the other.  The
witnesses are stored and can be re-expanded independently of the solver.

Two certificate modes exist.  The plain mode works with polynomial
identities in the ambient ring; these restrict to the surface, so a plain
success is also a surface success.  The quotient mode reduces everything
to normal form first and spans the quotient basis monomials instead; it is
the fallback for pairs whose products only cover the surface algebra after
reduction (the n=1 pair built from a single coordinate derivation needs
this).

The runner assembles the full check: divergence and kernel verification,
certificates for both lifted orientations of every pair, smoothness
witnesses for the zero fiber, and exact spanning ranks at sampled points.
Its verdict is deliberately capped at "certified-at-samples".
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .fields import VectorField, lie_bracket
from .lifts import (BaseField, SpanningFamily, lift, spanning_family)
from .linalg import ExactMatrix, exact_rank, solve_columns
from .poly import Poly, PolyRing
from .scalars import GaussianRational, ONE, ZERO
from .surface import (NotTangentError, SamplingError, SamplingSpec,
                      SurfacePoint, SuspensionContext, basepoint_search,
                      divergence_on_suspension, sample_zero_fiber,
                      smoothness_witness, tangent_basis)


class CertifyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# kernel families


@dataclass(frozen=True)
class KernelFamily:
    owner: VectorField
    generators: tuple[Poly, ...]


def verify_kernel(theta, generators: Sequence[Poly]) -> KernelFamily:
    """Check that the field annihilates every generator, exactly."""
    owner = getattr(theta, "ambient", theta)
    for k in generators:
        if not owner.apply(k).is_zero:
            raise CertifyError(f"not annihilated by the field: {k}")
    return KernelFamily(owner, tuple(generators))


def monomial_closure(generators: Sequence[Poly], ring: PolyRing,
                     max_degree: int,
                     reducer=None) -> list[Poly]:
    """Products of the generators up to the degree bound, including 1.

    Kernels are closed under multiplication, so the closure stays inside
    the kernel.  Nonzero constant generators are skipped (they add nothing
    to the span and would never raise the degree).  With a reducer, every
    product is reduced first and the bound applies to the reduced form.
    """
    reduce = reducer if reducer is not None else (lambda p: p)
    seeds = []
    for g in generators:
        g = reduce(g)
        if g.is_zero or g.is_constant():
            continue
        if g.total_degree() <= max_degree:
            seeds.append(g)
    out: dict = {}
    one = ring.one()
    out[one.key()] = one
    frontier = [one]
    while frontier:
        nxt = []
        for p in frontier:
            for g in seeds:
                q = reduce(p * g)
                if q.is_zero or q.total_degree() > max_degree:
                    continue
                if q.key() in out:
                    continue
                out[q.key()] = q
                nxt.append(q)
        frontier = nxt
    return sorted(out.values(), key=lambda p: (p.total_degree(), p.key()))


# ---------------------------------------------------------------------------
# certificates


@dataclass
class SemiCompatCertificate:
    """Witnessed degree-truncated certificate for one ordered pair."""

    kernel_nu: KernelFamily
    kernel_mu: KernelFamily
    ideal: tuple[Poly, ...]
    degree_bound: int
    mode: str                      # "plain" or "quotient"
    success: bool
    products: list[tuple[Poly, Poly, Poly]]   # (a, b, reduced product)
    targets: list[Poly]
    witnesses: list[list[GaussianRational] | None]
    unreachable: list[str]

    def re_verify(self, ctx: SuspensionContext | None = None) -> bool:
        """Re-expand every witness identity from scratch."""
        reduce = (lambda p: p) if self.mode == "plain" else \
            (lambda p: ctx.normal_form(p))
        for a, b, prod in self.products:
            if reduce(a * b) != prod:
                return False
        for target, coeffs in zip(self.targets, self.witnesses):
            if coeffs is None:
                continue
            ring = target.ring
            total = ring.zero()
            for c, (_, _, prod) in zip(coeffs, self.products):
                if not c.is_zero:
                    total = total + prod.scale(c)
            if total != target:
                return False
        return True


def _monomial_universe(ring: PolyRing, max_degree: int,
                       quotient: bool) -> list[Poly]:
    out = []
    for e in ring.exponents_up_to(max_degree):
        if quotient and min(e[0], e[1]) != 0:
            continue
        out.append(ring.monomial(e))
    return sorted(out, key=lambda p: (p.total_degree(), p.key()))


def _span_solve(products: list[tuple[Poly, Poly, Poly]],
                targets: list[Poly]):
    support = sorted({e for _, _, p in products for e in p.terms} |
                     {e for t in targets for e in t.terms})
    row_of = {e: i for i, e in enumerate(support)}
    matrix = ExactMatrix([[ZERO] * len(products) for _ in support])
    for j, (_, _, prod) in enumerate(products):
        for e, c in prod.terms.items():
            matrix.entries[row_of[e]][j] = c
    columns = []
    for t in targets:
        col = [ZERO] * len(support)
        for e, c in t.terms.items():
            col[row_of[e]] = c
        columns.append(col)
    return solve_columns(matrix, columns)


def semicompat_certificate(kernel_nu: KernelFamily, kernel_mu: KernelFamily,
                           ideal: Sequence[Poly], degree_bound: int,
                           ctx: SuspensionContext | None = None,
                           mode: str = "auto") -> SemiCompatCertificate:
    """Certify that, up to the degree bound, the span of kernel products
    contains every ideal generator times every monomial.

    Infeasibility is a certificate failure with the unreachable targets
    listed, not an exception.  mode "auto" tries the plain polynomial ring
    first and falls back to the quotient when a context is available.
    """
    ideal = tuple(ideal)
    if not ideal or all(h.is_zero for h in ideal):
        raise CertifyError("the proposed ideal has no nonzero generator")
    if mode not in ("auto", "plain", "quotient"):
        raise CertifyError(f"unknown certificate mode {mode!r}")
    ring = next(h for h in ideal if not h.is_zero).ring
    ambient = ctx is not None and ring.variables == ctx.ring.variables
    if mode == "quotient":
        if not ambient:
            raise CertifyError("quotient mode needs ambient generators and "
                               "a suspension context")
        return _certificate_in_mode(kernel_nu, kernel_mu, ideal,
                                    degree_bound, ctx, "quotient")
    plain = _certificate_in_mode(kernel_nu, kernel_mu, ideal, degree_bound,
                                 ctx, "plain")
    if plain.success or mode == "plain" or not ambient:
        return plain
    quotient = _certificate_in_mode(kernel_nu, kernel_mu, ideal, degree_bound,
                                    ctx, "quotient")
    return quotient if quotient.success else plain


def _certificate_in_mode(kernel_nu, kernel_mu, ideal, degree_bound, ctx,
                         mode) -> SemiCompatCertificate:
    ring = next(h for h in ideal if not h.is_zero).ring
    reducer = None
    if mode == "quotient":
        if ring.variables != ctx.ring.variables:
            raise CertifyError("quotient certificates need ambient generators")
        reducer = ctx.normal_form
    reduce = reducer if reducer is not None else (lambda p: p)

    closure_nu = monomial_closure(kernel_nu.generators, ring, degree_bound,
                                  reducer)
    closure_mu = monomial_closure(kernel_mu.generators, ring, degree_bound,
                                  reducer)
    products: list[tuple[Poly, Poly, Poly]] = []
    seen = set()
    for a in closure_nu:
        for b in closure_mu:
            prod = reduce(a * b)
            if prod.is_zero or prod.key() in seen:
                continue
            seen.add(prod.key())
            products.append((a, b, prod))
    if all(len(prod.terms) == 1 for _, _, prod in products):
        # a deduped monomial product of excess degree sits alone in its
        # row, so its coefficient is forced to zero; dropping it is sound
        products = [t for t in products if t[2].total_degree() <= degree_bound]

    quotient = mode == "quotient"
    targets = []
    for h in ideal:
        h = reduce(h)
        if h.is_zero:
            continue
        for m in _monomial_universe(ring, degree_bound, quotient):
            t = reduce(h * m)
            if t.is_zero or t.total_degree() > degree_bound:
                continue
            targets.append(t)
    dedup: dict = {}
    for t in targets:
        dedup.setdefault(t.key(), t)
    targets = sorted(dedup.values(), key=lambda p: (p.total_degree(), p.key()))

    witnesses = _span_solve(products, targets)
    unreachable = [str(t) for t, w in zip(targets, witnesses) if w is None]
    return SemiCompatCertificate(
        kernel_nu=kernel_nu, kernel_mu=kernel_mu, ideal=ideal,
        degree_bound=degree_bound, mode=mode, success=not unreachable,
        products=products, targets=targets, witnesses=witnesses,
        unreachable=unreachable)


# ---------------------------------------------------------------------------
# lifted pairs and ideals


def lift_ideal(ideal: Sequence[Poly], ctx: SuspensionContext,
               bound: int) -> list[Poly]:
    """Normal forms of each generator times u^i v^j with i+j <= bound."""
    out: dict = {}
    u, v = ctx.ring.var("u"), ctx.ring.var("v")
    for h in ideal:
        if h.ring.variables != ctx.base_ring.variables:
            raise CertifyError("ideal generators live in the base variables")
        h_amb = h.extend_to(ctx.ring)
        for i in range(bound + 1):
            for j in range(bound + 1 - i):
                g = ctx.normal_form(h_amb * u ** i * v ** j)
                if not g.is_zero:
                    out.setdefault(g.key(), g)
    return sorted(out.values(), key=lambda p: (p.total_degree(), p.key()))


@dataclass(frozen=True)
class LiftedPair:
    """Opposite-side lifts of a base pair with their kernels and ideal."""

    alpha: BaseField
    beta: BaseField
    orientation: str               # "uv": (alpha_u, beta_v); "vu": mirrored
    nu: object                     # SuspensionField
    mu: object
    kernel_nu: KernelFamily
    kernel_mu: KernelFamily
    ideal: tuple[Poly, ...]


def lift_pair(alpha: BaseField, beta: BaseField,
              kernel_alpha: Sequence[Poly], kernel_beta: Sequence[Poly],
              ideal: Sequence[Poly], ctx: SuspensionContext,
              orientation: str = "uv",
              ideal_bound: int = 4) -> LiftedPair:
    """Lift a base pair to opposite sides; the fiber coordinate of the
    opposite side joins each kernel, and the ideal is closed under
    multiplication by powers of u and v (normal-formed)."""
    if orientation not in ("uv", "vu"):
        raise CertifyError(f"orientation must be 'uv' or 'vu', not {orientation!r}")
    side_a, side_b = ("u", "v") if orientation == "uv" else ("v", "u")
    nu, mu = lift(alpha, ctx, side_a), lift(beta, ctx, side_b)
    partner = {"u": "v", "v": "u"}
    gens_nu = [ctx.ring.var(partner[side_a])]
    gens_nu += [k.extend_to(ctx.ring) for k in kernel_alpha]
    gens_mu = [ctx.ring.var(partner[side_b])]
    gens_mu += [k.extend_to(ctx.ring) for k in kernel_beta]
    return LiftedPair(
        alpha=alpha, beta=beta, orientation=orientation, nu=nu, mu=mu,
        kernel_nu=verify_kernel(nu, gens_nu),
        kernel_mu=verify_kernel(mu, gens_mu),
        ideal=tuple(lift_ideal(ideal, ctx, ideal_bound)))


# ---------------------------------------------------------------------------
# spanning ranks


@dataclass(frozen=True)
class RankReport:
    rank: int
    full_rank: int
    rows: int

    @property
    def full(self) -> bool:
        return self.rank == self.full_rank


def _wedge_rows(vector_pairs, dim):
    rows = []
    for a, b, scale in vector_pairs:
        coords = []
        for i in range(dim):
            for j in range(i + 1, dim):
                coords.append(scale * (a[i] * b[j] - a[j] * b[i]))
        rows.append(coords)
    return rows


def spanning_rank(family: SpanningFamily, ctx: SuspensionContext) -> RankReport:
    """Exact rank of the scaled wedges of an evaluated family inside the
    second exterior power of the tangent space at its basepoint."""
    point = family.basepoint
    basis = tangent_basis(ctx, point)
    dim = len(basis)
    columns = ExactMatrix.from_rows(
        [[vec[i] for vec in basis] for i in range(len(point.coords))])
    pairs = []
    raw = []
    for sp in family.pairs:
        raw.append(list(sp.a))
        raw.append(list(sp.b))
    sols = solve_columns(columns, raw)
    for k, sp in enumerate(family.pairs):
        a, b = sols[2 * k], sols[2 * k + 1]
        if a is None or b is None:
            raise NotTangentError(
                f"family vector is not tangent at the basepoint: {sp.label}")
        pairs.append((a, b, sp.ideal_value))
    rows = _wedge_rows(pairs, dim)
    full = math.comb(dim, 2)
    if not rows:
        return RankReport(0, full, 0)
    return RankReport(exact_rank(ExactMatrix.from_rows(rows)), full, len(rows))


def base_spanning_rank(pairs: Sequence[tuple[BaseField, BaseField, Sequence[Poly]]],
                       z0: Sequence[GaussianRational]) -> RankReport:
    """Rank of the scaled base wedges at a base point, in the second
    exterior power of the base tangent space."""
    triples = []
    for alpha, beta, gens in pairs:
        value = ZERO
        for g in gens:
            val = g.evaluate_exact(z0)
            if not val.is_zero:
                value = val
                break
        triples.append((alpha.evaluate_exact(z0), beta.evaluate_exact(z0),
                        value))
    if not triples:
        return RankReport(0, 0, 0)
    n = len(triples[0][0])
    rows = _wedge_rows(triples, n)
    full = math.comb(n, 2)
    if full == 0:
        return RankReport(0, 0, len(rows))
    return RankReport(exact_rank(ExactMatrix.from_rows(rows)), full, len(rows))


# ---------------------------------------------------------------------------
# bracket compatibility


@dataclass(frozen=True)
class BracketCheck:
    preconditions: dict
    identity_holds: bool

    @property
    def ok(self) -> bool:
        return self.identity_holds and all(self.preconditions.values())


def compatible_bracket_check(nu: VectorField, mu: VectorField, h: Poly,
                             f: Poly, g: Poly) -> BracketCheck:
    """Check the bracket identity expressing a scaled field as a
    difference of brackets:

        f*g*nu(h) * mu  ==  [f*nu, g*h*mu] - [f*h*nu, g*mu]

    with the membership preconditions reported individually.
    """
    nu = getattr(nu, "ambient", nu)
    mu = getattr(mu, "ambient", mu)
    pre = {
        "nu(h) in Ker nu": nu.apply(nu.apply(h)).is_zero,
        "h in Ker mu": mu.apply(h).is_zero,
        "f in Ker nu": nu.apply(f).is_zero,
        "g in Ker mu": mu.apply(g).is_zero,
    }
    lhs = mu.scale(f * g * nu.apply(h))
    rhs = lie_bracket(nu.scale(f), mu.scale(g * h)) - \
        lie_bracket(nu.scale(f * h), mu.scale(g))
    return BracketCheck(preconditions=pre,
                        identity_holds=(lhs - rhs).is_zero)


# ---------------------------------------------------------------------------
# the assembled runner


@dataclass(frozen=True)
class PairSpec:
    """A user-proposed base pair with kernels and an ideal proposal."""

    alpha: BaseField
    beta: BaseField
    kernel_alpha: tuple[Poly, ...] = ()
    kernel_beta: tuple[Poly, ...] = ()
    ideal: tuple[Poly, ...] = ()

    def ideal_or_unit(self, ring: PolyRing) -> tuple[Poly, ...]:
        return self.ideal if self.ideal else (ring.one(),)


@dataclass(frozen=True)
class Assumptions:
    """Hypotheses the artifact cannot decide and the user must assert."""

    cohomology: bool | None = None
    note: str = ""


@dataclass
class CriterionReport:
    n: int
    f: str
    assumptions: dict
    smoothness: dict
    pairs: list
    sampling: dict
    ranks: list
    problems: list
    verdict: str
    timings: dict = dc_field(default_factory=dict)

    def to_json_dict(self) -> dict:
        # timings stay out: reports must be byte-identical across runs
        return {
            "n": self.n, "f": self.f, "assumptions": self.assumptions,
            "smoothness": self.smoothness, "pairs": self.pairs,
            "sampling": self.sampling, "ranks": self.ranks,
            "problems": self.problems, "verdict": self.verdict,
        }


def _point_text(point: SurfacePoint) -> str:
    return "(" + ", ".join(str(c) for c in point.coords) + ")"


def _certificate_search(pair: LiftedPair, ctx: SuspensionContext,
                        degree_bound: int) -> dict:
    """Certificate at the requested bound, plus the smallest bound that
    also succeeds.  The claim made is the one at the requested bound;
    success at a smaller bound is weaker, not stronger (degree growth can
    turn success into failure, e.g. a unit ideal is always reached at
    degree 0), so the search never settles for an early success."""
    cert = semicompat_certificate(pair.kernel_nu, pair.kernel_mu,
                                  pair.ideal, degree_bound, ctx=ctx,
                                  mode="auto")
    if not cert.success:
        return {"orientation": pair.orientation, "success": False,
                "degree": degree_bound, "mode": cert.mode,
                "products": len(cert.products),
                "targets": len(cert.targets),
                "unreachable": cert.unreachable[:8]}
    smallest = degree_bound
    for d in range(degree_bound):
        small = semicompat_certificate(pair.kernel_nu, pair.kernel_mu,
                                       pair.ideal, d, ctx=ctx, mode="auto")
        if small.success:
            smallest = d
            break
    return {"orientation": pair.orientation, "success": True,
            "degree": degree_bound, "smallest_success_degree": smallest,
            "mode": cert.mode, "products": len(cert.products),
            "targets": len(cert.targets), "unreachable": []}


def run_vdp_criterion(ctx: SuspensionContext, pairs: Sequence[PairSpec],
                      assumptions: Assumptions, sampling: SamplingSpec,
                      degree_bound: int = 4) -> CriterionReport:
    """Run every finite hypothesis of the volume-density criterion on the
    suspension: divergence and kernel checks, degree-truncated
    certificates for both lifted orientations, zero-fiber smoothness
    witnesses, and exact spanning ranks at sampled admissible points.

    The verdict is "certified-at-samples" only when every sub-check
    passed and the undecidable topological hypothesis is asserted true;
    sub-check failures are recorded, never thrown.
    """
    t0 = time.perf_counter()
    problems: list[str] = []
    pair_reports: list[dict] = []
    timings: dict = {}

    if not pairs:
        problems.append("no pairs were given; nothing can span")

    for k, spec in enumerate(pairs):
        entry: dict = {"index": k,
                       "alpha": [str(c) for c in spec.alpha.coeffs],
                       "beta": [str(c) for c in spec.beta.coeffs]}
        div_ok = spec.alpha.divergence().is_zero and \
            spec.beta.divergence().is_zero
        entry["divergence_free"] = div_ok
        if not div_ok:
            problems.append(f"pair {k}: base fields are not volume preserving")
        try:
            alpha_vf = VectorField(ctx.base_ring, spec.alpha.coeffs)
            beta_vf = VectorField(ctx.base_ring, spec.beta.coeffs)
            verify_kernel(alpha_vf, spec.kernel_alpha)
            verify_kernel(beta_vf, spec.kernel_beta)
            entry["kernels_verified"] = True
        except CertifyError as err:
            entry["kernels_verified"] = False
            problems.append(f"pair {k}: {err}")
            pair_reports.append(entry)
            continue

        ideal = spec.ideal_or_unit(ctx.base_ring)
        entry["ideal"] = [str(h) for h in ideal]
        certs = []
        for orientation in ("uv", "vu"):
            lifted = lift_pair(spec.alpha, spec.beta, spec.kernel_alpha,
                               spec.kernel_beta, ideal, ctx, orientation,
                               ideal_bound=degree_bound)
            lifted_div_ok = (
                lifted.nu.multiplier.is_zero and lifted.mu.multiplier.is_zero
                and divergence_on_suspension(lifted.nu, ctx).is_zero
                and divergence_on_suspension(lifted.mu, ctx).is_zero)
            if not lifted_div_ok:
                problems.append(
                    f"pair {k} ({orientation}): lifted fields fail the "
                    "divergence check")
            cert = _certificate_search(lifted, ctx, degree_bound)
            cert["lifted_divergence_free"] = lifted_div_ok
            certs.append(cert)
            if not cert["success"]:
                problems.append(
                    f"pair {k} ({orientation}): no certificate up to degree "
                    f"{degree_bound}; first unreachable: "
                    f"{cert['unreachable'][:1]}")
        entry["certificates"] = certs
        pair_reports.append(entry)
    timings["pairs"] = time.perf_counter() - t0

    # exact points are forced: rank claims are only made in exact arithmetic
    t1 = time.perf_counter()
    exact_spec = SamplingSpec(count=sampling.count, seed=sampling.seed,
                              region=sampling.region, exactness="exact",
                              denominator_bound=sampling.denominator_bound,
                              imaginary=sampling.imaginary,
                              max_attempts=sampling.max_attempts)
    triples = [(spec.alpha, spec.beta, spec.ideal_or_unit(ctx.base_ring))
               for spec in pairs]
    points: list[SurfacePoint] = []
    sampling_report: dict = {"count": exact_spec.count, "seed": exact_spec.seed,
                             "exactness": "exact"}
    if pairs:
        try:
            points, rejections = basepoint_search(
                ctx, exact_spec,
                ideals=[spec.ideal_or_unit(ctx.base_ring) for spec in pairs],
                count=exact_spec.count)
            sampling_report["attempts"] = rejections.attempts
            sampling_report["rejected"] = dict(sorted(
                rejections.rejected.items()))
        except SamplingError as err:
            problems.append(f"sampling failed: {err}")
            sampling_report["error"] = str(err)

    ranks: list[dict] = []
    for point in points:
        family = spanning_family(triples, ctx, point)
        report = spanning_rank(family, ctx)
        ranks.append({"point": _point_text(point), "rank": report.rank,
                      "full": report.full})
        if not report.full:
            problems.append(
                f"spanning rank {report.rank} < {report.full_rank} at "
                f"{_point_text(point)}")
    timings["ranks"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    fiber_points = sample_zero_fiber(ctx, exact_spec)
    fiber_z = [p.z for p in fiber_points]
    smooth = smoothness_witness(ctx, fiber_z, certificate_degree=degree_bound)
    smooth_dict = {
        "zero_fiber_samples": smooth.zero_fiber,
        "singular_points": [
            "(" + ", ".join(str(c) for c in z) + ")"
            for z in smooth.singular_points],
        "certificate_found": smooth.certificate is not None,
    }
    if smooth.certificate is not None:
        smooth_dict["certificate"] = {
            "f": str(smooth.certificate["f"]),
            "partials": [str(p) for p in smooth.certificate["partials"]],
            "degree_bound": smooth.certificate["degree_bound"],
        }
    if not smooth.ok:
        problems.append("zero fiber has singular sampled points")
    timings["smoothness"] = time.perf_counter() - t2

    assumptions_dict = {"cohomology": assumptions.cohomology,
                        "note": assumptions.note}
    if problems:
        verdict = "failed"
    elif assumptions.cohomology is not True:
        verdict = "inconclusive"
        assumptions_dict["explanation"] = (
            "the topological vanishing hypothesis is undecidable here and "
            "was not asserted; certify it externally and set the flag")
    else:
        verdict = "certified-at-samples"

    return CriterionReport(
        n=ctx.n, f=str(ctx.f_base), assumptions=assumptions_dict,
        smoothness=smooth_dict, pairs=pair_reports, sampling=sampling_report,
        ranks=ranks, problems=problems, verdict=verdict, timings=timings)
