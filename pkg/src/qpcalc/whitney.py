"""Whitney-style C^k gluing over Q_p^m: a distance-derived radius function,
a greedy disjoint clopen support family, the indicator partition of unity,
per-site Taylor jets, the glued extension, and exact verification that the
difference quotients of the glue match those of the jets on the closed set.

The closed set A is a finite union of cosets at the working resolution;
every construction below is exact, so "matches" means equality of p-adic
numbers, not smallness of a float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .extension import packing_check, packing_check_many
from .funcs import MultiPoly, SymbolicFunction, as_polynomials
from .measure import GridFunction, coset_key, enumerate_cosets
from .padic import (
    Ball,
    PAdicNumber,
    PAdicVector,
    PadicError,
    PPow,
)
from .quotients import NonconvergenceError, QuotientPoint, phin, phin_limit

DEFAULT_PREC = 24
#: construction exponents (s0, s1, s2); the gauge scale is b = p^(-s0),
#: the enlargement factor p^(-s1), and the packing scale offset s2.
DEFAULT_CONSTANTS = (2, 0, -1)


def validate_constants(s0: int, s1: int, s2: int) -> None:
    """The inequalities the gluing constants must satisfy."""
    if not (s0 >= 1 and s1 <= 0 and s2 >= -1):
        raise PadicError("need s0 >= 1, s1 <= 0, s2 >= -1")
    if not abs(s1) + 1 < s0:
        raise PadicError("need |s1| + 1 < s0")
    if not s0 + s2 >= 0:
        raise PadicError("need s0 + s2 >= 0")


# ---------------------------------------------------------------------------
# distance to a coset union and the radius function h
# ---------------------------------------------------------------------------

def dist_to_set(A, x: PAdicVector) -> Fraction:
    """Exact sup-norm distance from x to a finite union of coset balls."""
    A = list(A)
    if not A:
        raise PadicError("empty coset union")
    best = None
    for ball in A:
        d = (x - ball.center).sup_norm()
        d = Fraction(0) if d <= ball.radius() else d
        if best is None or d < best:
            best = d
    return best


def _pexp(q: Fraction, p: int) -> int:
    """Exponent d with q = p^(-d) for an exact power of p."""
    d = 0
    while q < 1:
        q *= p
        d += 1
    while q > 1:
        q /= p
        d -= 1
    if q != 1:
        raise PadicError("not a power of p")
    return d


class RadiusFunction:
    """h(x) = p^(e(x)) with |h(x)| = p^(-s0) * min(1, dist(x, A)).

    Values are powers of p, h is defined off A only, and the Lipschitz
    quotient of h is bounded by b = p^(-s0) (checked pairwise by callers).
    """

    __slots__ = ("A", "p", "s0")

    def __init__(self, A, p: int, s0: int):
        self.A = tuple(A)
        self.p = p
        self.s0 = s0

    @property
    def b(self) -> Fraction:
        return Fraction(1, self.p ** self.s0)

    def exponent(self, x: PAdicVector) -> int:
        d = dist_to_set(self.A, x)
        if d == 0:
            raise PadicError("radius function is defined off the closed set")
        return self.s0 + max(0, _pexp(d, self.p))

    def __call__(self, x: PAdicVector) -> PAdicNumber:
        return PAdicNumber.from_int(
            self.p, self.p ** self.exponent(x), prec=DEFAULT_PREC)

    def support_exp(self, x: PAdicVector) -> int:
        """Radius exponent of the support ball B(x, |pi*h(x)|)."""
        return self.exponent(x) + 1


def build_h(A, p: int, s0: int = DEFAULT_CONSTANTS[0]) -> RadiusFunction:
    return RadiusFunction(A, p, s0)


def lipschitz_gauge_check(h: RadiusFunction, points) -> tuple:
    """(ok, witness): |h(x)-h(y)| <= b|x-y| over all pairs, exactly."""
    points = list(points)
    for i in range(len(points)):
        hi = h(points[i])
        for j in range(i + 1, len(points)):
            gap = (hi - h(points[j])).norm()
            if gap > h.b * (points[i] - points[j]).sup_norm():
                return False, (points[i], points[j])
    return True, None


# ---------------------------------------------------------------------------
# disjoint support family and partition of unity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionFamily:
    sites: tuple          # admitted centers y, in admission order
    h: RadiusFunction
    resolution: int

    def __post_init__(self):
        exps = tuple(self.h.support_exp(y) for y in self.sites)
        index = {}
        for i, (y, e) in enumerate(zip(self.sites, exps)):
            index[(e, coset_key(y, e))] = i
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_levels", tuple(sorted(set(exps))))

    def support(self, i: int) -> Ball:
        return Ball(self.sites[i], self._exps[i])

    def support_indices(self, x: PAdicVector) -> list:
        """Indices of every admitted support containing x.  A support at
        level e contains x exactly when x shares the site's level-e coset,
        so this is one key lookup per distinct level in the family."""
        return [self._index[(e, key)] for e in self._levels
                if (e, (key := coset_key(x, e))) in self._index]

    def site_index_for(self, x: PAdicVector) -> int:
        hits = self.support_indices(x)
        if len(hits) != 1:
            raise PadicError(
                f"partition property violated: {len(hits)} supports at a point")
        return hits[0]

    def weights(self, x: PAdicVector):
        """Nonzero indicator weights [(site, w)] at x: exactly one entry,
        with w = 1, because the supports partition W.  Every omitted site
        carries weight 0 at x."""
        hit = self.site_index_for(x)
        return [(self.sites[hit], 1)]


def disjoint_ball_family(reps, h: RadiusFunction,
                         resolution: int) -> PartitionFamily:
    """Greedy scan in enumeration order: admit y when its support ball is
    disjoint from every admitted support.  Because the gauge is Lipschitz
    with constant < 1, intersecting supports have equal radii and coincide,
    so the admitted supports cover every scanned representative (verified).

    Two supports B(y, p^-ey), B(g, p^-eg) meet exactly when y and g share
    the coset at level min(ey, eg), so admission is a few coset-key lookups
    rather than a scan of everything admitted so far.
    """
    reps = list(reps)
    if not reps:
        raise PadicError("empty site list")
    exps = []
    for y in reps:
        e = h.support_exp(y)
        if e > resolution:
            raise PadicError(
                "resolution too coarse for the support radii: need "
                f"K >= {e}")
        exps.append(e)
    levels = sorted(set(exps))
    # taken[L] = coset keys at level L of admitted sites with exp >= L;
    # shallow[L] = keys at level L of admitted sites with exp exactly L
    taken = {L: set() for L in levels}
    shallow = {L: set() for L in levels}
    admitted = []
    for y, ey in zip(reps, exps):
        keys = {L: coset_key(y, L) for L in levels if L <= ey}
        clash = any(keys[L] in (taken[L] if L == ey else shallow[L])
                    for L in keys)
        # L == ey: an admitted site with exp >= ey shares y's coset at ey;
        # L < ey: an admitted site with exp exactly L contains y's support.
        if clash:
            continue
        admitted.append(y)
        for L in keys:
            taken[L].add(keys[L])
        shallow[ey].add(keys[ey])
    fam = PartitionFamily(sites=tuple(admitted), h=h,
                          resolution=resolution)
    for y in reps:
        fam.site_index_for(y)   # raises unless exactly one support hits
    return fam


def family_packing_report(fam: PartitionFamily, x: PAdicVector):
    """Packing bounds for the support family (gauge pi*h) at x.

    Scales alpha = beta = 1 with b' = p^-(s0+1) >= Lip of pi*h make the
    ratio window exactly (1 -+ p^-(2*s0+s2))/(1 +- ...) at the default
    constants, and the cardinality bound exceeds 1 as a covering family
    requires.
    """
    p = fam.h.p
    pi_h = lambda y: PAdicNumber.from_int(
        p, p ** (fam.h.exponent(y) + 1), prec=DEFAULT_PREC)
    bprime = Fraction(1, p ** (fam.h.s0 + 1))
    return packing_check(list(fam.sites), pi_h, bprime, 1, 1, x)


def family_packing_reports(fam: PartitionFamily, xs) -> list:
    """family_packing_report over many points, preconditions checked once."""
    p = fam.h.p
    pi_h = lambda y: PAdicNumber.from_int(
        p, p ** (fam.h.exponent(y) + 1), prec=DEFAULT_PREC)
    bprime = Fraction(1, p ** (fam.h.s0 + 1))
    return packing_check_many(list(fam.sites), pi_h, bprime, 1, 1, xs)


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------

def _shift_polys(polys, z: PAdicVector):
    """Recentered truncations written back in the ambient coordinates."""
    m = z.dim
    shift = [MultiPoly.coord(m, i) - MultiPoly.const(m, z.coords[i].as_fraction())
             for i in range(m)]
    return tuple(q.substitute(shift) for q in polys)


def jet_from_function(f: SymbolicFunction, z: PAdicVector, k: int,
                      degree: int | None = None):
    """Taylor jet of f at z: the polynomial y -> sum of the multilinear
    difference-quotient values at vanishing increments, through total degree
    `degree` (default k+1).  Exact for polynomial components; otherwise each
    coefficient is an iterated-shrinking-increment limit.

    Returns a tuple of polynomials in the ambient coordinates, one per
    output component; evaluating at z reproduces f(z).
    """
    if degree is None:
        degree = k + 1
    m = f.m
    center = [c.as_fraction() for c in z.coords]
    try:
        polys = as_polynomials(f)
    except PadicError:
        polys = None
    if polys is not None:
        out = []
        for q in polys:
            rec = q.recenter(center).truncate_total_degree(degree)
            out.append(rec)
        return _shift_polys(out, z)
    # limit route: one coefficient per multi-index
    out = [MultiPoly.zero(m) for _ in range(f.n)]
    fz = f(z)
    for comp in range(f.n):
        out[comp] = out[comp] + MultiPoly.const(m, fz.coords[comp].as_fraction())
    for gamma in _multi_indices(m, degree):
        n = sum(gamma)
        if n == 0:
            continue
        vs = []
        for i, g in enumerate(gamma):
            vs.extend([_unit(f.p, m, i)] * g)
        report = phin_limit(f, n, z, vs)
        if not report.converged:
            raise NonconvergenceError(
                "jet coefficient limit did not stabilize")
        for comp in range(f.n):
            c = report.value.coords[comp].as_fraction()
            if c:
                out[comp] = out[comp] + MultiPoly.monomial(m, gamma, c)
    return _shift_polys(out, z)


def _unit(p: int, m: int, i: int) -> PAdicVector:
    coords = [PAdicNumber.zero(p)] * m
    coords[i] = PAdicNumber.from_int(p, 1, prec=DEFAULT_PREC)
    return PAdicVector(tuple(coords))


def _multi_indices(m: int, degree: int):
    if m == 0:
        yield ()
        return
    for total in range(degree + 1):
        yield from _indices_summing(m, total)


def _indices_summing(m: int, total: int):
    if m == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _indices_summing(m - 1, total - first):
            yield (first,) + rest


@dataclass(frozen=True)
class JetField:
    """Per-representative polynomial jets over a closed coset union."""
    k: int
    A: tuple              # coset balls
    resolution: int
    jets: tuple           # ((rep: PAdicVector, polys: tuple[MultiPoly]), ...)

    def __post_init__(self):
        # coset-key lookup for jet_at, and per-level nearest-rep index:
        # level[L] maps a key at L to the first rep index in that coset.
        by_key = {}
        levels = [dict() for _ in range(self.resolution + 1)]
        for i, (z, _) in enumerate(self.jets):
            by_key[coset_key(z, self.resolution)] = i
            for L in range(self.resolution + 1):
                levels[L].setdefault(coset_key(z, L), i)
        object.__setattr__(self, "_by_key", by_key)
        object.__setattr__(self, "_levels", levels)

    @property
    def p(self) -> int:
        return self.jets[0][0].p

    @property
    def m(self) -> int:
        return self.jets[0][0].dim

    @property
    def n(self) -> int:
        return len(self.jets[0][1])

    def reps(self):
        return [z for z, _ in self.jets]

    def jet_at(self, x: PAdicVector):
        """The jet of the representative whose resolution-coset contains x."""
        i = self._by_key.get(coset_key(x, self.resolution))
        if i is None:
            raise PadicError("point lies in no jet coset")
        return self.jets[i]

    def nearest_rep_index(self, y: PAdicVector) -> int:
        """Index of the closest representative (first wins on ties): the
        first rep sharing the deepest coset with y."""
        for L in range(self.resolution, -1, -1):
            i = self._levels[L].get(coset_key(y, L))
            if i is not None:
                return i
        # distance 1 or more: every rep shares the trivial coset at level 0
        # only when coordinates agree above the unit; fall back to a scan.
        reps = self.reps()
        best, d = 0, (y - reps[0]).sup_norm()
        for i in range(1, len(reps)):
            di = (y - reps[i]).sup_norm()
            if di < d:
                best, d = i, di
        return best

    def evaluate_jet(self, polys, x: PAdicVector) -> PAdicVector:
        return PAdicVector(tuple(q.evaluate(x, prec=DEFAULT_PREC)
                                 for q in polys))

    def to_json(self):
        return {
            "k": self.k,
            "resolution": self.resolution,
            "A": [b.to_json() for b in self.A],
            "jets": [[z.to_json(),
                      [sorted([list(e), _fr(c)] for e, c in q.terms.items())
                       for q in polys]]
                     for z, polys in self.jets],
        }

    @classmethod
    def from_json(cls, obj) -> "JetField":
        A = tuple(Ball.from_json(b) for b in obj["A"])
        jets = []
        for zj, tables in obj["jets"]:
            z = PAdicVector.from_json(zj)
            polys = []
            for table in tables:
                q = MultiPoly.zero(z.dim)
                for exps, c in table:
                    q = q + MultiPoly.monomial(z.dim, tuple(exps),
                                               _parse_fr(c))
                polys.append(q)
            jets.append((z, tuple(polys)))
        return cls(k=obj["k"], A=A, resolution=obj["resolution"],
                   jets=tuple(jets))


def _fr(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def _parse_fr(s: str) -> Fraction:
    a, b = s.split("/")
    return Fraction(int(a), int(b))


def jet_field_from_function(f: SymbolicFunction, A, resolution: int,
                            k: int, degree: int | None = None,
                            cap: int | None = None) -> JetField:
    """Jets of f at every representative of the coset union A."""
    A = tuple(A)
    jets = []
    kwargs = {} if cap is None else {"cap": cap}
    for ball in A:
        for z in enumerate_cosets(ball, resolution, **kwargs):
            jets.append((z, jet_from_function(f, z, k, degree)))
    return JetField(k=k, A=A, resolution=resolution, jets=tuple(jets))


# ---------------------------------------------------------------------------
# compatibility modulus
# ---------------------------------------------------------------------------

def _quotient_bound(Q: MultiPoly, z: PAdicVector, order: int,
                    zeta: int = 1) -> PPow:
    """Ultrametric bound for the order-j difference quotient of Q at z,
    over unit directions and increments of norm <= p^(-zeta).

    Built symbolically: substitute z + v1*t1 + ... + vj*tj into Q with the
    v-coordinates and t's as fresh variables, alternate over increment
    subsets, divide by t1...tj exactly, and bound each monomial by the
    p-norm of its coefficient times p^(-zeta * t-degree).
    """
    p = z.p
    m = z.dim
    j = order
    if j == 0:
        # C0 norm over the unit ball: max coefficient norm
        best = PPow.zero(p)
        for c in Q.terms.values():
            best = max(best, _p_norm(c, p))
        return best
    nv = j * m + j
    args_base = [MultiPoly.const(nv, z.coords[i].as_fraction())
                 for i in range(m)]
    total = MultiPoly.zero(nv)
    for mask in range(1 << j):
        args = list(args_base)
        for i in range(j):
            if mask >> i & 1:
                ti = MultiPoly.coord(nv, j * m + i)
                for c in range(m):
                    args[c] = args[c] + MultiPoly.coord(nv, i * m + c) * ti
        term = Q.substitute(args)
        sign = 1 if (j - bin(mask).count("1")) % 2 == 0 else -1
        total = total + term * Fraction(sign)
    exps = [0] * nv
    for i in range(j):
        exps[j * m + i] = 1
    total = total.divide_by_monomial(tuple(exps)) * Fraction(1, factorial(j))
    best = PPow.zero(p)
    for e, c in total.terms.items():
        tdeg = sum(e[j * m:])
        cand = _p_norm(c, p) * PPow(p, Fraction(-zeta * tdeg))
        best = max(best, cand)
    return best


def _p_norm(c: Fraction, p: int) -> PPow:
    if c == 0:
        return PPow.zero(p)
    v = 0
    num, den = c.numerator, c.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return PPow(p, Fraction(-v))


def _jet_signature(polys) -> tuple:
    return tuple(tuple(sorted(poly.terms.items())) for poly in polys)


def jet_compat_modulus(J: JetField, delta: Fraction,
                       zeta: int = 1) -> PPow:
    """rho(S, delta): the worst scaled jet disagreement over representative
    pairs within delta, all orders j <= k, as an exact power-of-p bound.

    Pairs with equal jets contribute nothing, so representatives are first
    grouped by jet signature and only cross-class pairs are scanned; a field
    of identical jets (a globally polynomial source) costs one pass.
    """
    p = J.p
    best = PPow.zero(p)
    classes = {}
    for a, (_, px) in enumerate(J.jets):
        classes.setdefault(_jet_signature(px), []).append(a)
    groups = list(classes.values())
    for gi in range(len(groups)):
        for gj in range(gi + 1, len(groups)):
            for a in groups[gi]:
                x, px = J.jets[a]
                for bidx in groups[gj]:
                    z, pz = J.jets[bidx]
                    d = (x - z).sup_norm()
                    if d == 0 or d > delta:
                        continue
                    dpow = PPow.from_norm(p, d)
                    for comp in range(J.n):
                        Q = px[comp] - pz[comp]
                        if Q.is_zero():
                            continue
                        for j in range(J.k + 1):
                            bound = max(_quotient_bound(Q, z, j, zeta),
                                        _quotient_bound(Q, x, j, zeta))
                            scaled = bound * dpow.pow_frac(Fraction(j - J.k))
                            best = max(best, scaled)
    return best


# ---------------------------------------------------------------------------
# the glued extension
# ---------------------------------------------------------------------------

class WhitneyExtension:
    """g(x) = P_x(x) on A; g(x) = P_(psi(y(x)))(x) off A, where y(x) is the
    unique support site at x and psi maps a site to the nearest jet
    representative (first wins on ties).  Exact piecewise polynomial."""

    __slots__ = ("jets", "family", "_psi")

    def __init__(self, jets: JetField, family: PartitionFamily):
        self.jets = jets
        self.family = family
        self._psi = tuple(jets.jets[jets.nearest_rep_index(y)][1]
                          for y in family.sites)

    @property
    def p(self) -> int:
        return self.jets.p

    def psi_site(self, y: PAdicVector) -> PAdicVector:
        z0, _ = self.jets.jets[self.jets.nearest_rep_index(y)]
        return z0

    def __call__(self, x: PAdicVector) -> PAdicVector:
        if dist_to_set(self.jets.A, x) == 0:
            _, polys = self.jets.jet_at(x)
            return self.jets.evaluate_jet(polys, x)
        i = self.family.site_index_for(x)
        return self.jets.evaluate_jet(self._psi[i], x)

    def evaluate_sum_form(self, x: PAdicVector) -> PAdicVector:
        """The partition-sum form: sum over sites of w_y(x) P_psi(y)(x).
        Sums over every support containing x without assuming the partition
        property, so it cross-checks the single-site evaluation."""
        if dist_to_set(self.jets.A, x) == 0:
            return self(x)
        total = PAdicVector.zero(self.p, self.jets.n)
        for i in self.family.support_indices(x):
            total = total + self.jets.evaluate_jet(self._psi[i], x)
        return total

    def tabulate(self, domain: Ball, resolution: int,
                 cap: int | None = None) -> GridFunction:
        kwargs = {} if cap is None else {"cap": cap}
        return GridFunction.from_callable(domain, resolution, self, **kwargs)


def whitney_extend(J: JetField, domain: Ball, resolution: int,
                   cap: int | None = None) -> WhitneyExtension:
    """Build the radius function, the support family over domain \\ A, and
    the glued extension, at the given grid resolution."""
    h = build_h(J.A, J.p)
    kwargs = {} if cap is None else {"cap": cap}
    reps = [y for y in enumerate_cosets(domain, resolution, **kwargs)
            if dist_to_set(J.A, y) != 0]
    fam = disjoint_ball_family(reps, h, resolution)
    return WhitneyExtension(J, fam)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WhitneyErrorRow:
    order: int
    samples: int
    observed: Fraction        # max |phi^j g - phi^j P_z| over samples
    bound: Fraction           # decay estimate; must dominate observed
    dominated: bool

    def to_json(self):
        return {"order": self.order, "samples": self.samples,
                "observed": _fr(Fraction(self.observed)),
                "bound": _fr(Fraction(self.bound)),
                "dominated": self.dominated}


def sample_quotient_points(J: JetField, order: int, count: int, rng,
                           t_exps=(1, 2, 3)) -> list:
    """Random (z; v; t) with z a jet representative, |v_i| = 1, |t_i| < 1."""
    p = J.p
    m = J.m
    reps = J.reps()
    out = []
    for _ in range(count):
        z = reps[rng.randrange(len(reps))]
        vs = []
        for _ in range(order):
            coords = [rng.randrange(p ** 3) for _ in range(m)]
            coords[rng.randrange(m)] = 1 + p * rng.randrange(p ** 2)
            vs.append(PAdicVector.from_ints(p, coords, prec=DEFAULT_PREC))
        ts = tuple(PAdicNumber.from_int(p, p ** rng.choice(list(t_exps)),
                                        prec=DEFAULT_PREC)
                   for _ in range(order))
        out.append(QuotientPoint(z, tuple(vs), ts))
    return out


def verify_whitney(g, J: JetField, samples, zeta: int = 1) -> list:
    """Per order j <= k: max over the given quotient points of
    |phi^j g - phi^j P_z| (z the point's base), against the decay estimate
    p^j * rho(delta) * |x - z|^(k-j) with delta the largest increment span
    seen.  Rows report exact observed errors and whether the bound holds.
    """
    p = J.p
    by_order = {}
    for q in samples:
        by_order.setdefault(q.order, []).append(q)
    rho_cache = {}
    rows = []
    for j in sorted(by_order):
        if j > J.k:
            raise PadicError("sample order exceeds the jet degree k")
        observed = Fraction(0)
        bound = Fraction(0)
        for q in by_order[j]:
            z = q.x
            _, polys = J.jet_at(z)
            pz = lambda y: J.evaluate_jet(polys, y)
            err = (phin(g, j, q) - phin(pz, j, q)).sup_norm() if j else \
                (g(z) - pz(z)).sup_norm()
            observed = max(observed, err)
            span = Fraction(0)
            acc = z
            for v, t in zip(q.vs, q.ts):
                acc = acc + v.scale(t)
            span = (acc - z).sup_norm()
            if span == 0:
                continue
            if span not in rho_cache:
                rho_cache[span] = jet_compat_modulus(J, span, zeta)
            rho = rho_cache[span]
            if rho.exp is not None:
                est = (Fraction(p) ** j) * rho.as_fraction() \
                    * span ** (J.k - j)
                bound = max(bound, est)
        rows.append(WhitneyErrorRow(order=j, samples=len(by_order[j]),
                                    observed=observed, bound=bound,
                                    dominated=observed <= bound
                                    or observed == 0))
    return rows
