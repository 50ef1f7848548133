"""Numerical harness: approximate volume-preserving fields on the surface
by combinations of complete fields and their brackets.

The dictionary collects exactly divergence-free building blocks: kernel
multiples of both lifted fields of each pair, twist fields h(z)(u d_u -
v d_v), and single brackets across the two kernel families of a pair
(same-family brackets vanish identically and are skipped).  Every entry is
divergence-checked in exact arithmetic before any numeric work; a failure
there is a programming error, not data.

Fitting happens per sample point inside the tangent space: residuals are
measured against an orthonormal frame for the kernel of d(uv - f), never
in ambient coordinates.  The complex least-squares problem is solved
through the real doubling embedding with column scaling, and the
minimum-norm solution is taken on rank deficiency, which keeps results
deterministic for redundant dictionaries.

Non-polynomial f is supported on a parallel numeric-only path driven by
user callbacks for f and its gradient; brackets are unavailable there
(they would need derivatives the callbacks do not provide).
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy

from .certify import LiftedPair, monomial_closure
from .fields import lie_bracket
from .lifts import rk4_flow, twist_field
from .surface import (SurfacePoint, SuspensionContext, SuspensionField,
                      divergence_on_suspension, tangent_field)


class ApproxError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dictionaries


@dataclass(frozen=True)
class DictionaryEntry:
    field: SuspensionField
    label: str
    provenance: str                  # kernel-multiple / twist-field / bracket
    parents: tuple[int, int] | None = None


@dataclass
class Dictionary:
    ctx: SuspensionContext
    entries: list[DictionaryEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> list[str]:
        return [e.label for e in self.entries]


def _entry_key(sf: SuspensionField):
    return tuple(c.key() for c in sf.ambient.coeffs)


def build_dictionary(ctx: SuspensionContext, pairs: Sequence[LiftedPair],
                     degree: int, include_twists: bool = True) -> Dictionary:
    """Kernel multiples, twists, and cross-family brackets, all verified
    divergence-free in exact arithmetic before use."""
    entries: list[DictionaryEntry] = []
    seen = set()

    def push(sf: SuspensionField, label: str, provenance: str,
             parents=None) -> int | None:
        if not sf.multiplier.is_zero:
            raise ApproxError(f"dictionary entry is not tangent: {label}")
        if not divergence_on_suspension(sf, ctx).is_zero:
            raise ApproxError(f"dictionary entry has divergence: {label}")
        key = _entry_key(sf)
        if key in seen:
            return None
        seen.add(key)
        entries.append(DictionaryEntry(sf, label, provenance, parents))
        return len(entries) - 1

    for pi, pair in enumerate(pairs):
        nu_ids, mu_ids = [], []
        closure_nu = monomial_closure(pair.kernel_nu.generators, ctx.ring,
                                      degree)
        closure_mu = monomial_closure(pair.kernel_mu.generators, ctx.ring,
                                      degree)
        for k in closure_nu:
            idx = push(pair.nu.scale(k), f"pair{pi}:({k})*nu",
                       "kernel-multiple")
            if idx is not None:
                nu_ids.append(idx)
        for k in closure_mu:
            idx = push(pair.mu.scale(k), f"pair{pi}:({k})*mu",
                       "kernel-multiple")
            if idx is not None:
                mu_ids.append(idx)
        # same-family brackets are identically zero; only cross brackets
        # contribute new directions
        for i in nu_ids:
            for j in mu_ids:
                amb = lie_bracket(entries[i].field.ambient,
                                  entries[j].field.ambient)
                if amb.is_zero:
                    continue
                sf = tangent_field(amb, ctx)
                push(sf, f"[{entries[i].label}, {entries[j].label}]",
                     "bracket", parents=(i, j))

    if include_twists:
        for e in ctx.base_ring.exponents_up_to(degree):
            h = ctx.base_ring.monomial(e)
            push(tangent_field(twist_field(ctx, h), ctx),
                 f"({h})*(u*d_u - v*d_v)", "twist-field")

    return Dictionary(ctx, entries)


# ---------------------------------------------------------------------------
# tangent frames and least squares


def tangent_frame(gradient: Sequence[complex]) -> numpy.ndarray:
    """Orthonormal basis, as columns, of the orthogonal complement of a
    nonzero gradient row; this is the tangent space at the point."""
    row = numpy.array([gradient], dtype=complex)
    norm = numpy.linalg.norm(row)
    if norm < 1e-13:
        raise ApproxError("singular point: the defining gradient vanishes")
    _, _, vh = numpy.linalg.svd(row)
    return vh[1:].conj().T


@dataclass
class FitResult:
    labels: list[str]
    coefficients: list[complex]
    residuals: list[float]           # one l2 norm per sample point
    sup_residual: float

    def coefficient_map(self) -> dict:
        return dict(zip(self.labels, self.coefficients))


def _solve_scaled_lstsq(a: numpy.ndarray, b: numpy.ndarray) -> numpy.ndarray:
    scales = numpy.linalg.norm(a, axis=0)
    scales[scales == 0] = 1.0
    scaled = a / scales
    top = numpy.hstack([scaled.real, -scaled.imag])
    bottom = numpy.hstack([scaled.imag, scaled.real])
    big = numpy.vstack([top, bottom])
    rhs = numpy.concatenate([b.real, b.imag])
    sol, *_ = numpy.linalg.lstsq(big, rhs, rcond=None)
    k = a.shape[1]
    return (sol[:k] + 1j * sol[k:]) / scales


def fit_field(target: SuspensionField, dictionary: Dictionary,
              samples: Sequence[SurfacePoint]) -> FitResult:
    """Least-squares coefficients reproducing the target at the samples,
    with errors measured inside the tangent space at each point."""
    if not dictionary.entries:
        raise ApproxError("the dictionary is empty")
    if not samples:
        raise ApproxError("no sample points were given")
    ctx = dictionary.ctx
    if not divergence_on_suspension(target, ctx).is_zero:
        raise ApproxError("the target is not volume preserving")

    blocks = []
    rhs_blocks = []
    for p in samples:
        coords = p.complex_coords()
        frame = tangent_frame(ctx.defining_gradient_complex(coords))
        cols = []
        for entry in dictionary.entries:
            vec = numpy.array(entry.field.ambient.evaluate_complex(coords))
            cols.append(frame.conj().T @ vec)
        blocks.append(numpy.column_stack(cols))
        tvec = numpy.array(target.ambient.evaluate_complex(coords))
        rhs_blocks.append(frame.conj().T @ tvec)

    a = numpy.vstack(blocks)
    b = numpy.concatenate(rhs_blocks)
    coeffs = _solve_scaled_lstsq(a, b)

    residuals = []
    for block, rblock in zip(blocks, rhs_blocks):
        r = block @ coeffs - rblock
        residuals.append(float(numpy.linalg.norm(r)))
    return FitResult(labels=dictionary.labels(),
                     coefficients=[complex(c) for c in coeffs],
                     residuals=residuals,
                     sup_residual=max(residuals))


def residual_curve(target: SuspensionField, ctx: SuspensionContext,
                   pairs: Sequence[LiftedPair],
                   samples: Sequence[SurfacePoint],
                   degrees: Sequence[int],
                   include_twists: bool = True) -> list[dict]:
    """sup-residual of the best fit as the dictionary degree grows.

    Dictionaries are nested in the degree, so the curve is non-increasing
    up to solver noise."""
    out = []
    for d in degrees:
        dictionary = build_dictionary(ctx, pairs, d,
                                      include_twists=include_twists)
        fit = fit_field(target, dictionary, samples)
        out.append({"degree": d, "entries": len(dictionary),
                    "sup_residual": fit.sup_residual})
    return out


# ---------------------------------------------------------------------------
# flow audits


def fitted_evaluator(dictionary: Dictionary, coeffs: Sequence[complex]):
    """Pointwise evaluator of the coefficient combination of the entries."""
    entries = [(c, e.field.ambient) for c, e in
               zip(coeffs, dictionary.entries) if abs(c) > 0]

    def evaluate(coords):
        out = [0j] * dictionary.ctx.ring.nvars
        for c, amb in entries:
            vec = amb.evaluate_complex(coords)
            for i, v in enumerate(vec):
                out[i] += c * v
        return out

    return evaluate


def flow_deviation_audit(target: SuspensionField, dictionary: Dictionary,
                         fit: FitResult, samples: Sequence[SurfacePoint],
                         t_max: float = 0.1, steps: int = 64,
                         checkpoints: int = 4) -> list[dict]:
    """Integrate the fitted field and the target from a few points and
    report their deviation against the bound 10 * sup_residual * t plus a
    small absolute allowance for integrator error."""
    fitted = fitted_evaluator(dictionary, fit.coefficients)
    reference = target.ambient.evaluate_complex
    audits = []
    for p in samples:
        start = list(p.complex_coords())
        rows = []
        for k in range(1, checkpoints + 1):
            t = t_max * k / checkpoints
            a = rk4_flow(fitted, start, t, steps)
            b = rk4_flow(reference, start, t, steps)
            deviation = max(abs(x - y) for x, y in zip(a, b))
            allowed = 10.0 * fit.sup_residual * t + 1e-9
            rows.append({"t": t, "deviation": deviation,
                         "allowed": allowed, "ok": deviation <= allowed})
        audits.append({"point": [str(c) for c in start], "checks": rows,
                       "ok": all(r["ok"] for r in rows)})
    return audits


def volume_audit(sf: SuspensionField, ctx: SuspensionContext,
                 point: SurfacePoint, t: float = 0.25,
                 steps: int = 512, h: float = 1e-6) -> dict:
    """Numeric witness of the divergence transfer formula: the chart
    determinant of the time-t flow, weighted by the chart density of the
    induced volume, must match exp of the integral of the surface
    divergence along the trajectory.

    Chart: (u, z) on u != 0, where the density is proportional to 1/u.
    """
    div = divergence_on_suspension(sf, ctx)
    coords0 = point.complex_coords()
    if abs(coords0[0]) < 1e-9:
        raise ApproxError("the audit chart needs u != 0")

    def embed(chart):
        u = chart[0]
        z = list(chart[1:])
        v = ctx.f_base.evaluate_complex(z) / u
        return [u, v, *z]

    def project(coords):
        return [coords[0]] + list(coords[2:])

    def flow_chart(chart):
        moved = rk4_flow(sf.ambient.evaluate_complex, embed(chart), t, steps)
        return project(moved)

    chart0 = project(coords0)
    m = len(chart0)
    jac = numpy.zeros((m, m), dtype=complex)
    for j in range(m):
        bumped = list(chart0)
        bumped[j] += h
        plus = flow_chart(bumped)
        bumped[j] -= 2 * h
        minus = flow_chart(bumped)
        for i in range(m):
            jac[i, j] = (plus[i] - minus[i]) / (2 * h)
    det = complex(numpy.linalg.det(jac))
    end = rk4_flow(sf.ambient.evaluate_complex, list(coords0), t, steps)
    weighted = det * coords0[0] / end[0]

    # Simpson integral of the divergence along the trajectory
    if steps % 2:
        steps += 1
    path = [list(coords0)]
    dt = t / steps
    x = list(coords0)
    for _ in range(steps):
        x = rk4_flow(sf.ambient.evaluate_complex, x, dt, 1)
        path.append(x)
    values = [div.evaluate_complex(c) for c in path]
    integral = 0j
    for k in range(0, steps, 2):
        integral += (values[k] + 4 * values[k + 1] + values[k + 2]) * dt / 3
    expected = cmath.exp(integral)
    return {"weighted_determinant": weighted, "expected": expected,
            "error": abs(weighted - expected)}


# ---------------------------------------------------------------------------
# numeric-only path for non-polynomial f


@dataclass(frozen=True)
class NumericSurface:
    """A suspension over a user-evaluated holomorphic function: only f and
    its gradient are available, so everything here is floating point."""

    n: int
    f: Callable
    grad: Callable

    def residual(self, coords) -> float:
        u, v = coords[0], coords[1]
        return abs(u * v - self.f(list(coords[2:])))

    def gradient(self, coords):
        z = list(coords[2:])
        g = self.grad(z)
        return [coords[1], coords[0]] + [-gj for gj in g]


def numeric_sample(surface: NumericSurface, count: int, seed: int,
                   radius: float = 1.0) -> list[list[complex]]:
    """Chart draws with u bounded away from zero and v = f(z)/u."""
    rng = random.Random(seed)

    def draw():
        return complex(rng.uniform(-radius, radius),
                       rng.uniform(-radius, radius))

    out = []
    while len(out) < count:
        u = draw()
        if abs(u) < 0.25:
            continue
        z = [draw() for _ in range(surface.n)]
        v = surface.f(z) / u
        out.append([u, v, *z])
    return out


@dataclass(frozen=True)
class NumericEntry:
    label: str
    provenance: str
    evaluate: Callable


def numeric_lift_entries(surface: NumericSurface,
                         base_coeffs: Sequence[Callable],
                         kernel_nu: Sequence[Callable],
                         kernel_mu: Sequence[Callable],
                         include_twists: bool = True) -> list[NumericEntry]:
    """Lifted-pair dictionary over a callback surface: the side lifts of
    one base field pair is not available here, so the caller provides the
    z-coefficient callbacks of both base fields as one sequence per field
    via base_coeffs = (alpha, beta); kernel callbacks multiply the lifts.
    Brackets are not constructible from point evaluations and are omitted.
    """
    alpha, beta = base_coeffs

    def theta_f(coeffs, z):
        g = surface.grad(z)
        return sum(c(z) * gj for c, gj in zip(coeffs, g))

    def lift_eval(coeffs, side):
        def evaluate(coords):
            u, v = coords[0], coords[1]
            z = list(coords[2:])
            fiber = v if side == "u" else u
            out = [0j, 0j] + [fiber * c(z) for c in coeffs]
            out[0 if side == "u" else 1] = theta_f(coeffs, z)
            return out
        return evaluate

    entries = [NumericEntry("nu_u", "complete-lift", lift_eval(alpha, "u")),
               NumericEntry("mu_v", "complete-lift", lift_eval(beta, "v"))]

    def scaled(entry: NumericEntry, k: Callable, label: str) -> NumericEntry:
        def evaluate(coords):
            s = k(list(coords))
            return [s * c for c in entry.evaluate(coords)]
        return NumericEntry(label, "kernel-multiple", evaluate)

    for i, k in enumerate(kernel_nu):
        entries.append(scaled(entries[0], k, f"k{i}*nu_u"))
    for i, k in enumerate(kernel_mu):
        entries.append(scaled(entries[1], k, f"k{i}*mu_v"))
    if include_twists:
        entries.append(NumericEntry(
            "u*d_u - v*d_v", "twist-field",
            lambda coords: [coords[0], -coords[1]] + [0j] * surface.n))
    return entries


def numeric_fit(target: Callable, entries: Sequence[NumericEntry],
                surface: NumericSurface,
                points: Sequence[Sequence[complex]]) -> FitResult:
    """The callback twin of fit_field; same embedding, same scaling."""
    if not entries:
        raise ApproxError("the dictionary is empty")
    if not points:
        raise ApproxError("no sample points were given")
    blocks, rhs_blocks = [], []
    for coords in points:
        frame = tangent_frame(surface.gradient(coords))
        cols = [frame.conj().T @ numpy.array(e.evaluate(list(coords)))
                for e in entries]
        blocks.append(numpy.column_stack(cols))
        rhs_blocks.append(frame.conj().T @ numpy.array(target(list(coords))))
    a = numpy.vstack(blocks)
    b = numpy.concatenate(rhs_blocks)
    coeffs = _solve_scaled_lstsq(a, b)
    residuals = [float(numpy.linalg.norm(block @ coeffs - r))
                 for block, r in zip(blocks, rhs_blocks)]
    return FitResult(labels=[e.label for e in entries],
                     coefficients=[complex(c) for c in coeffs],
                     residuals=residuals, sup_residual=max(residuals))
