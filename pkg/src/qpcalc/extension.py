"""Constructive ultrametric Lipschitz/Hölder extension: certified sample
sets, the weighted Chebyshev radius in closed form, nearest-point extension
with exact constant preservation, packing-family bounds, and the
regularity-class decomposition of a grid function.

All norm comparisons with fractional Hölder exponents go through the exact
power-of-p magnitude type (PPow); nothing is floated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .measure import GridFunction, coset_key, enumerate_cosets
from .padic import (Ball, PAdicVector, PadicError, PPow,
                    from_json as number_from_json, ppow_le_scaled)


def _frac(q) -> Fraction:
    return Fraction(q)


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 \
        else str(q.numerator)


def _parse_frac(s) -> Fraction:
    if isinstance(s, str):
        if "/" in s:
            a, b = s.split("/")
            return Fraction(int(a), int(b))
        return Fraction(int(s))
    return Fraction(s)


# ---------------------------------------------------------------------------
# sample sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertifyReport:
    ok: bool
    pairs_checked: int
    violations: tuple     # ((i, j, |dv|, C*|dx|^r as PPow), ...) capped

    def to_json(self):
        return {
            "ok": self.ok,
            "pairs_checked": self.pairs_checked,
            "violations": [
                {"i": i, "j": j, "value_gap": gap.to_json(),
                 "allowed": allowed.to_json()}
                for i, j, gap, allowed in self.violations],
        }


class SampleSet:
    """Finite sites in Q_p^m with values in Q_p^n and claimed Hölder data
    (C, r); certification checks |v_i - v_j| <= C|x_i - x_j|^r on all pairs
    exactly and is required before extension."""

    __slots__ = ("points", "C", "r", "certified")

    def __init__(self, points, C, r):
        points = tuple((site, value) for site, value in points)
        if not points:
            raise PadicError("empty sample set")
        p = points[0][0].p
        m = points[0][0].dim
        n = points[0][1].dim
        seen = set()
        for site, value in points:
            if site.p != p or site.dim != m or value.p != p or value.dim != n:
                raise PadicError("inconsistent shapes in sample set")
            key = tuple(c.as_fraction() for c in site.coords)
            if key in seen:
                raise PadicError("duplicate site in sample set")
            seen.add(key)
        self.points = points
        self.C = _frac(C)
        self.r = _frac(r)
        if not 0 < self.r <= 1:
            raise PadicError("Hölder exponent must lie in (0, 1]")
        if self.C < 0:
            raise PadicError("Hölder constant must be nonnegative")
        self.certified = False

    @property
    def p(self) -> int:
        return self.points[0][0].p

    @property
    def m(self) -> int:
        return self.points[0][0].dim

    @property
    def n(self) -> int:
        return self.points[0][1].dim

    def sites(self):
        return [s for s, _ in self.points]

    def certify(self, max_violations: int = 8) -> CertifyReport:
        """Exhaustive all-pairs check; marks the set certified on success."""
        pts = self.points
        violations = []
        checked = 0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                checked += 1
                gap = PPow.from_norm(
                    self.p, (pts[i][1] - pts[j][1]).sup_norm())
                dist = PPow.from_norm(
                    self.p, (pts[i][0] - pts[j][0]).sup_norm())
                if not ppow_le_scaled(gap, self.C, dist.pow_frac(self.r)):
                    if len(violations) < max_violations:
                        violations.append((i, j, gap, dist.pow_frac(self.r)))
        ok = not violations
        self.certified = ok
        return CertifyReport(ok=ok, pairs_checked=checked,
                             violations=tuple(violations))

    def to_json(self):
        return {
            "constants": {"C": _frac_str(self.C),
                          "r": f"{self.r.numerator}/{self.r.denominator}"},
            "points": [[site.to_json(), value.to_json()]
                       for site, value in self.points],
        }

    @classmethod
    def from_json(cls, obj) -> "SampleSet":
        C = _parse_frac(obj["constants"]["C"])
        r = _parse_frac(obj["constants"]["r"])
        points = [(PAdicVector.from_json(site), PAdicVector.from_json(value))
                  for site, value in obj["points"]]
        return cls(points, C, r)


class WeightedSiteSet:
    """Finite pairs (z, x) with x nonzero: the centers and weights feeding
    the Chebyshev radius."""

    __slots__ = ("pairs",)

    def __init__(self, pairs):
        pairs = tuple((z, x) for z, x in pairs)
        if not pairs:
            raise PadicError("empty weighted site set")
        p = pairs[0][0].p
        n = pairs[0][0].dim
        for z, x in pairs:
            if z.p != p or z.dim != n or x.p != p:
                raise PadicError("inconsistent shapes in weighted site set")
            if x.is_zero():
                raise PadicError("weights must be nonzero")
        self.pairs = pairs

    @property
    def p(self) -> int:
        return self.pairs[0][0].p

    def to_json(self):
        return {"pairs": [[z.to_json(), x.to_json()] for z, x in self.pairs]}

    @classmethod
    def from_json(cls, obj) -> "WeightedSiteSet":
        return cls([(PAdicVector.from_json(z), number_from_json(x))
                    for z, x in obj["pairs"]])


# ---------------------------------------------------------------------------
# Chebyshev radius
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChebyshevResult:
    c: PPow                  # minimal level (power of p, possibly fractional exp)
    q: PAdicVector           # a point of X_c
    tight: tuple             # indices whose constraint is met with equality
    zero_radius: bool        # degenerate c = 0 case (all centers coincide)

    def to_json(self):
        return {"c": self.c.to_json(), "q": self.q.to_json(),
                "tight": list(self.tight), "zero_radius": self.zero_radius}


def chebyshev_radius(H: WeightedSiteSet, r) -> ChebyshevResult:
    """Minimal c with  X_c = { y : |y - z| <= |x|^r * c  for all (z,x) }
    nonempty, and a point q of X_c.

    In an ultrametric the minimum is attained on the finite candidate set
    { |z_i - z_j| / max(|x_i|,|x_j|)^r } (pairwise ball intersection plus the
    Helly property), and q may be taken as the center whose weight norm is
    smallest: every other constraint ball has radius at least |z_q - z_i|.
    """
    r = _frac(r)
    if not 0 < r <= 1:
        raise PadicError("Hölder exponent must lie in (0, 1]")
    pairs = H.pairs
    p = H.p
    weights = [PPow.from_norm(p, x.norm()) for _, x in pairs]
    c = PPow.zero(p)
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            dist = PPow.from_norm(p, (pairs[i][0] - pairs[j][0]).sup_norm())
            if dist.exp is None:
                continue
            cand = dist / max(weights[i], weights[j]).pow_frac(r)
            if cand > c:
                c = cand
    qi = min(range(len(pairs)), key=lambda k: weights[k])
    q = pairs[qi][0]
    tight = []
    if c.exp is not None:
        for k, ((z, _), w) in enumerate(zip(pairs, weights)):
            lhs = PPow.from_norm(p, (q - z).sup_norm())
            if lhs == w.pow_frac(r) * c:
                tight.append(k)
    return ChebyshevResult(c=c, q=q, tight=tuple(tight),
                           zero_radius=c.exp is None)


def chebyshev_feasible(H: WeightedSiteSet, r, y: PAdicVector,
                       level: PPow) -> bool:
    """Exact replay: does y satisfy every constraint at the given level?"""
    r = _frac(r)
    p = H.p
    for z, x in H.pairs:
        lhs = PPow.from_norm(p, (y - z).sup_norm())
        if not lhs <= PPow.from_norm(p, x.norm()).pow_frac(r) * level:
            return False
    return True


# ---------------------------------------------------------------------------
# nearest-point extension
# ---------------------------------------------------------------------------

def nearest_point(T, v: PAdicVector):
    """(v0, delta): the first member of T at minimal sup-distance from v."""
    T = list(T)
    if not T:
        raise PadicError("empty site list")
    best, delta = T[0], (v - T[0]).sup_norm()
    for x in T[1:]:
        d = (v - x).sup_norm()
        if d < delta:
            best, delta = x, d
    return best, delta


def extend_lipschitz(S: SampleSet, v: PAdicVector) -> PAdicVector:
    """Value at the nearest site; preserves (C, r) against every site."""
    if not S.certified:
        raise PadicError("sample set is not certified; run certify() first")
    sites = S.sites()
    v0, _ = nearest_point(sites, v)
    for site, value in S.points:
        if site is v0:
            return value
    raise AssertionError("nearest site vanished")  # pragma: no cover


def extend_batch(S: SampleSet, queries) -> list:
    """Extension over many query points; order-independent by construction."""
    return [extend_lipschitz(S, v) for v in queries]


def extend_to_grid(S: SampleSet, domain: Ball, resolution: int,
                   cap: int | None = None) -> GridFunction:
    """Tabulate the nearest-point extension on a full coset grid."""
    kwargs = {} if cap is None else {"cap": cap}
    reps = enumerate_cosets(domain, resolution, **kwargs)
    return GridFunction(domain, resolution,
                        [(rep, extend_lipschitz(S, rep)) for rep in reps])


# ---------------------------------------------------------------------------
# packing families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PackingResult:
    ratio_ok: bool
    card_ok: bool
    g_x: tuple               # members y of G_x (indices into G)
    card_bound: Fraction
    ratio_bounds: tuple      # (lower, upper) as Fractions
    violations: tuple

    def to_json(self):
        return {
            "ratio_ok": self.ratio_ok, "card_ok": self.card_ok,
            "g_x": list(self.g_x),
            "card": len(self.g_x),
            "card_bound": _frac_str(self.card_bound),
            "ratio_bounds": [_frac_str(b) for b in self.ratio_bounds],
            "violations": list(self.violations),
        }


def _power_level(q: Fraction, p: int):
    """L with q = p^(-L), or None when q is not a power of p."""
    L = 0
    while q < 1:
        q *= p
        L += 1
    while q > 1:
        q /= p
        L -= 1
    return L if q == 1 else None


def _floor_level(q: Fraction, p: int) -> int:
    """Least L with p^(-L) <= q (the level of the largest p-power under q)."""
    L = 0
    while Fraction(p) ** -L > q:
        L += 1
    while Fraction(p) ** -(L - 1) <= q:
        L -= 1
    return L


def _packing_setup(G, h, b, alpha, beta):
    """Validate the family preconditions; raise with the offending pair.

    Returns (radii, uniform_level): uniform_level is the common radius
    exponent when the gauge takes a single value on G (the frequent case),
    letting disjointness reduce to coset-key uniqueness at that level.
    """
    if not G:
        raise PadicError("empty packing family")
    if b <= 0 or alpha <= 0 or beta <= 0:
        raise PadicError("b, alpha, beta must be positive")
    if b * alpha >= 1 or b * beta >= 1:
        raise PadicError("need b*alpha < 1 and b*beta < 1")
    hv = [h(y) for y in G]
    if any(v.is_zero() for v in hv):
        raise PadicError("gauge h vanishes on a site")
    radii = [v.norm() for v in hv]
    p = G[0].p
    if all((v - hv[0]).is_zero() for v in hv[1:]):
        L = _power_level(radii[0], p)
        if L is not None:
            seen = {}
            for i, y in enumerate(G):
                key = coset_key(y, L)
                if key in seen:
                    raise PadicError(
                        f"balls at sites {seen[key]} and {i} are not disjoint")
                seen[key] = i
            return radii, L
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            dist = (G[i] - G[j]).sup_norm()
            if dist <= max(radii[i], radii[j]):
                raise PadicError(
                    f"balls at sites {i} and {j} are not disjoint")
            if (hv[i] - hv[j]).norm() > b * dist:
                raise PadicError(
                    f"b does not bound the Lipschitz quotient of h "
                    f"at sites {i} and {j}")
    return radii, None


def _packing_at(G, radii, h, b, alpha, beta, m, x, g_x=None) -> PackingResult:
    hxv = h(x)
    if hxv.is_zero():
        raise PadicError("gauge h vanishes at x")
    hx = hxv.norm()
    if g_x is None:
        g_x = [i for i, y in enumerate(G)
               if (x - y).sup_norm() <= max(alpha * hx, beta * radii[i])]
    lower = (1 - b * beta) / (1 + b * alpha)
    upper = (1 + b * beta) / (1 - b * alpha)
    violations = []
    for i in g_x:
        ratio = hx / radii[i]
        if not lower <= ratio <= upper:
            violations.append({"site": i, "ratio": _frac_str(ratio)})
    card_bound = (max(alpha, beta * (1 + b * alpha) / (1 - b * beta)) ** m
                  * ((1 + b * beta) / (1 - b * alpha)) ** m)
    card_ok = len(g_x) <= card_bound
    if not card_ok:
        violations.append({"cardinality": len(g_x),
                           "bound": _frac_str(card_bound)})
    ratio_ok = not any("site" in v for v in violations)
    return PackingResult(ratio_ok=ratio_ok,
                         card_ok=card_ok, g_x=tuple(g_x),
                         card_bound=card_bound,
                         ratio_bounds=(lower, upper),
                         violations=tuple(violations))


def packing_check(G, h, b, alpha, beta, x: PAdicVector) -> PackingResult:
    """Check the two packing bounds at x for the family G with gauge h.

    Preconditions (verified here, violations raise with the offending pair):
    the balls B(y, |h(y)|) are pairwise disjoint, b bounds the Lipschitz
    quotient of h on G, and b*alpha < 1 > b*beta.  x may be any point where
    h is defined; G_x collects the y whose beta-scaled ball meets the
    alpha-scaled ball of x (exact ultrametric intersection).  A bound
    failure falsifies the construction, not the inequality: it is reported,
    not raised.
    """
    G = list(G)
    b, alpha, beta = _frac(b), _frac(alpha), _frac(beta)
    radii, _ = _packing_setup(G, h, b, alpha, beta)
    return _packing_at(G, radii, h, b, alpha, beta, G[0].dim, x)


def packing_check_many(G, h, b, alpha, beta, xs) -> list:
    """packing_check over many x with the family preconditions verified
    once; uniform-gauge families get coset-key candidate lookups instead of
    per-x scans.  Results are in xs order."""
    G = list(G)
    b, alpha, beta = _frac(b), _frac(alpha), _frac(beta)
    radii, unif = _packing_setup(G, h, b, alpha, beta)
    m = G[0].dim
    p = G[0].p
    if unif is None:
        return [_packing_at(G, radii, h, b, alpha, beta, m, x) for x in xs]
    r = radii[0]
    buckets = {}
    out = []
    for x in xs:
        hxv = h(x)
        if hxv.is_zero():
            raise PadicError("gauge h vanishes at x")
        level = _floor_level(max(alpha * hxv.norm(), beta * r), p)
        if level not in buckets:
            d = {}
            for i, y in enumerate(G):
                d.setdefault(coset_key(y, level), []).append(i)
            buckets[level] = d
        g_x = buckets[level].get(coset_key(x, level), [])
        out.append(_packing_at(G, radii, h, b, alpha, beta, m, x, g_x=g_x))
    return out


# ---------------------------------------------------------------------------
# regularity-class decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EjDecomposition:
    classes: tuple           # ((j, (points...)), ...) nonempty, j increasing
    unassigned: tuple
    K: int
    r: Fraction

    def to_json(self):
        return {
            "K": self.K, "r": [self.r.numerator, self.r.denominator],
            "classes": [{"j": j, "points": [z.to_json() for z in pts]}
                        for j, pts in self.classes],
            "unassigned": [z.to_json() for z in self.unassigned],
        }


def decompose_Ej(f: GridFunction, r, j_range=None) -> EjDecomposition:
    """Assign each grid point z the least j such that for every scale
    p^(-l), j < l <= K, the bad set {x in B(z, p^(-l)) :
    |f(x)-f(z)| > p^j |x-z|^r} fills less than half the ball.

    Measures are exact coset counts at the grid resolution; points admitting
    no j in the budget are reported unassigned.
    """
    r = _frac(r)
    K = f.resolution
    p = f.p
    if j_range is None:
        j_range = range(0, K)
    reps = f.reps
    m = f.dims[0]
    # bucket representatives by the coset of each ball B(z, p^-l) once
    assigned = {}
    unassigned = []
    for z in reps:
        fz = f.evaluate(z)
        choice = None
        for j in j_range:
            ok = True
            for l in range(j + 1, K + 1):
                radius = Fraction(p) ** (-l)
                inside = [x for x in reps if (x - z).sup_norm() <= radius]
                bad = 0
                for x in inside:
                    dist = (x - z).sup_norm()
                    if dist == 0:
                        continue
                    gap = PPow.from_norm(p, (f.evaluate(x) - fz).sup_norm())
                    dpow = PPow.from_norm(p, dist).pow_frac(r)
                    if not ppow_le_scaled(gap, Fraction(p) ** j, dpow):
                        bad += 1
                if Fraction(bad, p ** ((K - l) * m)) >= Fraction(1, 2):
                    ok = False
                    break
            if ok:
                choice = j
                break
        if choice is None:
            unassigned.append(z)
        else:
            assigned.setdefault(choice, []).append(z)
    classes = tuple((j, tuple(assigned[j])) for j in sorted(assigned))
    return EjDecomposition(classes=classes, unassigned=tuple(unassigned),
                           K=K, r=r)


def verify_Ej(f: GridFunction, dec: EjDecomposition, max_violations: int = 8):
    """Per-class pairwise check: |f(x)-f(z)| <= p^j |x-z|^r for class pairs
    closer than p^(-j).  Returns (ok, violations)."""
    p = f.p
    violations = []
    for j, pts in dec.classes:
        scale = Fraction(p) ** j
        for a in range(len(pts)):
            for bidx in range(a + 1, len(pts)):
                x, z = pts[a], pts[bidx]
                dist = (x - z).sup_norm()
                if dist >= Fraction(p) ** (-j):
                    continue
                gap = PPow.from_norm(p, (f.evaluate(x) - f.evaluate(z)).sup_norm())
                dpow = PPow.from_norm(p, dist).pow_frac(dec.r)
                if not ppow_le_scaled(gap, scale, dpow):
                    if len(violations) < max_violations:
                        violations.append((j, x, z))
    return not violations, violations
