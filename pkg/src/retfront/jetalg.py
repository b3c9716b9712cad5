"""Exact truncated jet arithmetic over the local rings E(r; k+m+n).

Jets are polynomials with :class:`fractions.Fraction` coefficients, truncated
at a total degree ``L``.  Variables are split into four roles: corner
coordinates ``x``, internal coordinates ``y``, time ``t`` and parameters
``u``.  The heavy linear algebra (spans of modules inside ``J^L``) is done on
packed integer monomial keys with fraction-free elimination; the pivot of a
row is its *lowest* monomial in graded-lex order, which keeps fill-in small
because every reduction step only pushes terms towards higher degree, where
truncation eventually removes them.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

MAX_JET_DIM = 200_000

ROLES = ("x", "y", "t", "u")


class JetSpaceTooLarge(ValueError):
    pass


class ContextMismatch(ValueError):
    pass


class JetParseError(ValueError):
    pass


def jet_dimension(nvars: int, L: int) -> int:
    """Number of monomials of total degree <= L in ``nvars`` variables."""
    return math.comb(L + nvars, nvars)


@dataclass(frozen=True)
class RingContext:
    """Variable partition (x: r corner, y: k internal, t: m time, u: n parameters).

    ``u_names`` lets the parameter slot carry role tags such as
    ``("q1", "q2", "z")`` for generating families.
    """

    r: int = 0
    k: int = 0
    m: int = 0
    n: int = 0
    u_names: tuple[str, ...] | None = None

    def __post_init__(self):
        for name in ("r", "k", "m", "n"):
            if getattr(self, name) < 0:
                raise ValueError(f"variable count {name} must be >= 0")
        if self.u_names is not None:
            object.__setattr__(self, "u_names", tuple(self.u_names))
            if len(self.u_names) != self.n:
                raise ValueError("u_names must have exactly n entries")

    @property
    def nvars(self) -> int:
        return self.r + self.k + self.m + self.n

    @cached_property
    def names(self) -> tuple[str, ...]:
        def block(prefix, count):
            if count == 1:
                return [prefix]
            return [f"{prefix}{i + 1}" for i in range(count)]

        u = list(self.u_names) if self.u_names is not None else [f"u{i + 1}" for i in range(self.n)]
        return tuple(block("x", self.r) + block("y", self.k) + block("t", self.m) + u)

    @cached_property
    def _lookup(self) -> dict[str, int]:
        table = {name: i for i, name in enumerate(self.names)}
        # x1 / x are interchangeable when the block has a single variable
        for prefix, count, start in (("x", self.r, 0), ("y", self.k, self.r),
                                     ("t", self.m, self.r + self.k)):
            if count == 1:
                table.setdefault(f"{prefix}1", start)
        if self.u_names is None and self.n == 1:
            table.setdefault("u", self.r + self.k + self.m)
        return table

    def index(self, var: str | int) -> int:
        if isinstance(var, int):
            if not 0 <= var < self.nvars:
                raise ValueError(f"variable index {var} out of range")
            return var
        try:
            return self._lookup[var]
        except KeyError:
            raise ValueError(f"unknown variable {var!r} for context {self.names}") from None

    def role_indices(self, role: str) -> range:
        start = 0
        for name, count in zip(ROLES, (self.r, self.k, self.m, self.n)):
            if name == role:
                return range(start, start + count)
            start += count
        raise ValueError(f"unknown role {role!r}")

    def role_of(self, var: str | int) -> str:
        i = self.index(var)
        for role in ROLES:
            if i in self.role_indices(role):
                return role
        raise AssertionError


class Monomial(tuple):
    """Exponent vector indexed by the variables of a :class:`RingContext`."""

    __slots__ = ()

    def __new__(cls, exponents: Iterable[int] = ()):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError("exponents must be non-negative")
        return super().__new__(cls, exps)

    @property
    def degree(self) -> int:
        return sum(self)

    def render(self, context: RingContext) -> str:
        parts = []
        for name, e in zip(context.names, self):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"

    def __repr__(self):
        return f"Monomial({tuple(self)})"


def grlex_key(mono: Sequence[int]) -> tuple:
    """Sort key for graded-lex order with the last variable most significant."""
    return (sum(mono),) + tuple(reversed(mono))


# ---------------------------------------------------------------------------
# packed monomial keys


@lru_cache(maxsize=64)
def _packing(nvars: int, L: int) -> "_Packing":
    return _Packing(nvars, L)


class _Packing:
    """Monomials of degree <= L packed into ints whose order is graded lex.

    key = deg * B**v + sum(e_i * B**i) with B = L + 1.  Adding two keys
    multiplies the monomials; no carries occur while the product has degree
    <= L, and the top field then holds the product degree.
    """

    def __init__(self, nvars: int, L: int):
        self.nvars = nvars
        self.L = L
        self.base = L + 1
        self.shift = self.base ** nvars
        self.powers = [self.base ** i for i in range(nvars)]

    def pack(self, exps: Sequence[int]) -> int:
        key = 0
        deg = 0
        for e, p in zip(exps, self.powers):
            key += e * p
            deg += e
        return key + deg * self.shift

    def unpack(self, key: int) -> Monomial:
        key %= self.shift
        out = []
        for _ in range(self.nvars):
            key, e = divmod(key, self.base)
            out.append(e)
        return Monomial(out)

    def degree(self, key: int) -> int:
        return key // self.shift

    @lru_cache(maxsize=None)
    def monomial_keys(self, variables: tuple[int, ...], dmin: int, dmax: int) -> tuple[int, ...]:
        """Packed keys of all monomials in ``variables`` with dmin <= degree <= dmax."""
        out = []
        for d in range(max(dmin, 0), dmax + 1):
            for combo in itertools.combinations_with_replacement(variables, d):
                key = d * self.shift
                for i in combo:
                    key += self.powers[i]
                out.append(key)
        out.sort()
        return tuple(out)


def _check_dim(nvars: int, L: int, max_dim: int | None) -> None:
    cap = MAX_JET_DIM if max_dim is None else max_dim
    dim = jet_dimension(nvars, L)
    if dim > cap:
        raise JetSpaceTooLarge(
            f"jet space J^{L} in {nvars} variables has dimension {dim} > cap {cap}")


# ---------------------------------------------------------------------------
# JetPoly


class JetPoly:
    """Truncated polynomial ``j^L f(0)`` with exact rational coefficients.

    Immutable.  Terms of degree above the truncation order are discarded on
    construction, so building a JetPoly is the projection ``pi_L``.
    """

    __slots__ = ("context", "truncation", "_terms", "_hash")

    def __init__(self, context: RingContext, truncation: int,
                 terms: Mapping[Sequence[int], object] | None = None):
        if truncation < 0:
            raise ValueError("truncation order must be >= 0")
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            mono = mono if isinstance(mono, Monomial) else Monomial(mono)
            if len(mono) != context.nvars:
                raise ContextMismatch(
                    f"monomial {tuple(mono)} does not fit {context.nvars} variables")
            if mono.degree > truncation:
                continue
            c = Fraction(coeff)
            if c:
                clean[mono] = clean.get(mono, 0) + c
                if not clean[mono]:
                    del clean[mono]
        self.context = context
        self.truncation = truncation
        self._terms = clean
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, context: RingContext, truncation: int) -> "JetPoly":
        return cls(context, truncation)

    @classmethod
    def constant(cls, context: RingContext, truncation: int, value=1) -> "JetPoly":
        return cls(context, truncation, {(0,) * context.nvars: value})

    @classmethod
    def variable(cls, context: RingContext, truncation: int, var: str | int) -> "JetPoly":
        exps = [0] * context.nvars
        exps[context.index(var)] = 1
        return cls(context, truncation, {tuple(exps): 1})

    @classmethod
    def monomial(cls, context: RingContext, truncation: int, mono: Sequence[int], coeff=1):
        return cls(context, truncation, {tuple(mono): coeff})

    @classmethod
    def parse(cls, text: str, context: RingContext, truncation: int) -> "JetPoly":
        return _Parser(text, context, truncation).parse()

    # accessors --------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, mono: Sequence[int]) -> Fraction:
        return self._terms.get(Monomial(mono), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get(Monomial((0,) * self.context.nvars), Fraction(0))

    @property
    def degree(self) -> int:
        """Largest total degree present (-1 for the zero jet)."""
        return max((m.degree for m in self._terms), default=-1)

    @property
    def order(self) -> int:
        """Lowest total degree present (truncation + 1 for the zero jet)."""
        return min((m.degree for m in self._terms), default=self.truncation + 1)

    def homogeneous_part(self, d: int) -> "JetPoly":
        return JetPoly(self.context, self.truncation,
                       {m: c for m, c in self._terms.items() if m.degree == d})

    def involves(self, var: str | int) -> bool:
        i = self.context.index(var)
        return any(m[i] for m in self._terms)

    # arithmetic -------------------------------------------------------
    def _check(self, other: "JetPoly") -> None:
        if other.context != self.context:
            raise ContextMismatch("jets live in different ring contexts")
        if other.truncation != self.truncation:
            raise ContextMismatch(
                f"truncation mismatch: {self.truncation} vs {other.truncation}")

    def _coerce(self, other) -> "JetPoly":
        if isinstance(other, JetPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return JetPoly.constant(self.context, self.truncation, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0) + c
        return JetPoly(self.context, self.truncation, terms)

    __radd__ = __add__

    def __neg__(self):
        return JetPoly(self.context, self.truncation, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return JetPoly(self.context, self.truncation,
                           {m: c * other for m, c in self._terms.items()})
        if not isinstance(other, JetPoly):
            return NotImplemented
        return mul_truncated(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = JetPoly.constant(self.context, self.truncation)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, JetPoly):
            return NotImplemented
        return (self.context == other.context and self.truncation == other.truncation
                and self._terms == other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.context, self.truncation, frozenset(self._terms.items())))
        return self._hash

    # transformations --------------------------------------------------
    def with_truncation(self, L: int) -> "JetPoly":
        """Re-truncate at ``L``; widening treats the absent terms as zero."""
        return JetPoly(self.context, L, self._terms)

    def partial(self, var: str | int) -> "JetPoly":
        return partial(self, var)

    def substitute_zero(self, variables: Iterable[str | int]) -> "JetPoly":
        idx = {self.context.index(v) for v in variables}
        return JetPoly(self.context, self.truncation,
                       {m: c for m, c in self._terms.items() if not any(m[i] for i in idx)})

    def transfer(self, context: RingContext, mapping: Mapping[str | int, str | int] | None = None,
                 truncation: int | None = None) -> "JetPoly":
        """Move to another context by variable name.

        ``mapping`` renames selected variables; the rest keep their names.
        Terms involving a variable with no image are dropped, which restricts
        the jet to the zero locus of the missing variables.
        """
        truncation = self.truncation if truncation is None else truncation
        mapping = mapping or {}
        target = {}
        for i, name in enumerate(self.context.names):
            dest = mapping.get(name, mapping.get(i, name))
            if dest is None:
                continue
            try:
                target[i] = context.index(dest)
            except ValueError:
                continue
        terms = {}
        for m, c in self._terms.items():
            if any(e and i not in target for i, e in enumerate(m)):
                continue
            exps = [0] * context.nvars
            for i, e in enumerate(m):
                if e:
                    exps[target[i]] += e
            terms[tuple(exps)] = terms.get(tuple(exps), 0) + c
        return JetPoly(context, truncation, terms)

    def compose(self, images: Sequence["JetPoly"]) -> "JetPoly":
        """Substitute ``images[i]`` for variable ``i`` (truncated composition)."""
        if len(images) != self.context.nvars:
            raise ValueError("need one image per variable")
        ctx = images[0].context
        L = images[0].truncation
        for g in images:
            if g.context != ctx or g.truncation != L:
                raise ContextMismatch("images must share context and truncation")
        out = JetPoly.zero(ctx, L)
        powers: dict[tuple[int, int], JetPoly] = {}

        def power(i, e):
            if (i, e) not in powers:
                powers[(i, e)] = images[i] ** e
            return powers[(i, e)]

        for m, c in self._terms.items():
            term = JetPoly.constant(ctx, L, c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
            out = out + term
        return out

    def evaluate(self, values):
        """Evaluate numerically; ``values`` is indexable by variable index.

        Works with floats or numpy arrays (broadcast across samples).
        """
        total = 0.0
        for m, c in self._terms.items():
            term = float(c)
            for i, e in enumerate(m):
                if e:
                    term = term * values[i] ** e
            total = total + term
        return total

    # text -------------------------------------------------------------
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for m in sorted(self._terms, key=grlex_key, reverse=True):
            c = self._terms[m]
            sign = "-" if c < 0 else "+"
            a = abs(c)
            body = m.render(self.context)
            if body == "1":
                body = str(a)
            elif a != 1:
                body = f"{a}*{body}"
            pieces.append((sign, body))
        text = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"JetPoly({self.to_text()!r}, L={self.truncation}, vars={self.context.names})"


def mul_truncated(a: JetPoly, b: JetPoly) -> JetPoly:
    """Product of two jets with every term of degree > L discarded."""
    a._check(b)
    L = a.truncation
    terms: dict[tuple, Fraction] = {}
    for ma, ca in a._terms.items():
        da = ma.degree
        for mb, cb in b._terms.items():
            if da + mb.degree > L:
                continue
            m = tuple(x + y for x, y in zip(ma, mb))
            terms[m] = terms.get(m, 0) + ca * cb
    return JetPoly(a.context, L, terms)


def partial(a: JetPoly, var: str | int) -> JetPoly:
    """Formal partial derivative, kept at the same truncation order."""
    i = a.context.index(var)
    terms = {}
    for m, c in a._terms.items():
        e = m[i]
        if e:
            exps = list(m)
            exps[i] -= 1
            terms[tuple(exps)] = c * e
    return JetPoly(a.context, a.truncation, terms)


# ---------------------------------------------------------------------------
# spans of modules inside J^L


@dataclass(frozen=True)
class ModulePart:
    """Generators with coefficients from a subring: the products g * mu for
    every monomial mu in ``multiplier_vars`` with degree >= ``min_degree``.

    ``multiplier_vars=None`` means all variables; an empty tuple gives the
    plain real span of the generators.
    """

    generators: tuple[JetPoly, ...]
    multiplier_vars: tuple[str | int, ...] | None = None
    min_degree: int = 0


@dataclass(frozen=True)
class MembershipReport:
    contained: bool
    residue: JetPoly
    cobasis: tuple[Monomial, ...]


class SubspaceBasis:
    """Reduced row-echelon basis of a subspace of ``J^L``.

    The pivot of each row is its lowest monomial in graded-lex order; rows are
    stored by increasing pivot, pivots carry coefficient 1, and every other row
    vanishes at each pivot.
    """

    def __init__(self, context: RingContext, truncation: int,
                 pivot_rows: Mapping[int, Mapping[int, Fraction]]):
        self.context = context
        self.truncation = truncation
        self._pack = _packing(context.nvars, truncation)
        self._rows = dict(sorted(pivot_rows.items()))

    @cached_property
    def rows(self) -> tuple[JetPoly, ...]:
        unpack = self._pack.unpack
        return tuple(JetPoly(self.context, self.truncation,
                             {unpack(k): c for k, c in row.items()})
                     for row in self._rows.values())

    @property
    def pivots(self) -> tuple[Monomial, ...]:
        return tuple(self._pack.unpack(k) for k in self._rows)

    @property
    def dimension(self) -> int:
        return len(self._rows)

    def __len__(self):
        return len(self._rows)

    def __eq__(self, other):
        if not isinstance(other, SubspaceBasis):
            return NotImplemented
        return (self.context == other.context and self.truncation == other.truncation
                and self._rows == other._rows)

    def __repr__(self):
        return (f"SubspaceBasis(dim={self.dimension}, L={self.truncation}, "
                f"vars={self.context.names})")


def _int_row(poly: JetPoly, pack: _Packing) -> dict[int, int]:
    """Packed integer row proportional to ``poly`` (denominators cleared)."""
    den = 1
    for c in poly._terms.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    return {pack.pack(m): int(c * den) for m, c in poly._terms.items()}


def _generator_rows(part: ModulePart, context: RingContext, L: int,
                    pack: _Packing) -> Iterator[dict[int, int]]:
    if part.multiplier_vars is None:
        mvars = tuple(range(context.nvars))
    else:
        mvars = tuple(sorted({context.index(v) for v in part.multiplier_vars}))
    shift = pack.shift
    for g in part.generators:
        if g.context != context:
            raise ContextMismatch("generator context differs from the span context")
        g = g.with_truncation(L)
        if g.is_zero():
            continue
        row = _int_row(g, pack)
        terms = [(k, c, k // shift) for k, c in row.items()]
        order = min(d for _, _, d in terms)
        for mk in pack.monomial_keys(mvars, part.min_degree, L - order):
            dm = mk // shift
            out = {k + mk: c for k, c, d in terms if d + dm <= L}
            if out:
                yield out


def _content_normalize(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for c in row.values():
        g = math.gcd(g, c)
        if g == 1:
            return row
    if g > 1:
        return {k: c // g for k, c in row.items()}
    return row


def _echelon(rows: Iterable[dict[int, int]]) -> dict[int, dict[int, int]]:
    """Fraction-free head reduction; returns pivot key -> integer row."""
    pivots: dict[int, dict[int, int]] = {}
    for row in sorted(rows, key=len):
        while row:
            head = min(row)
            prow = pivots.get(head)
            if prow is None:
                pivots[head] = _content_normalize(row)
                break
            a = prow[head]
            b = row[head]
            g = math.gcd(a, b)
            a //= g
            b //= g
            new = {k: a * c for k, c in row.items()} if a != 1 else dict(row)
            for k, c in prow.items():
                v = new.get(k, 0) - b * c
                if v:
                    new[k] = v
                else:
                    new.pop(k, None)
            row = _content_normalize(new) if new else new
    return pivots


def _fully_reduce(pivots: dict[int, dict[int, int]]) -> dict[int, dict[int, Fraction]]:
    """Back-substitute a head-reduced system into reduced row-echelon form."""
    out: dict[int, dict[int, Fraction]] = {}
    for head in sorted(pivots, reverse=True):
        row = pivots[head]
        lead = row[head]
        acc = {k: Fraction(c, lead) for k, c in row.items()}
        for k in sorted(row):
            if k == head or k not in out:
                continue
            c = acc.pop(k, 0)
            if not c:
                continue
            for kk, cc in out[k].items():
                if kk == k:
                    continue
                v = acc.get(kk, 0) - c * cc
                if v:
                    acc[kk] = v
                else:
                    acc.pop(kk, None)
        out[head] = acc
    return out


def span_pivots(parts: Sequence[ModulePart], context: RingContext, L: int,
                max_dim: int | None = None) -> frozenset[int]:
    """Leading-monomial keys of the span of several module parts.

    The set of pivots is an invariant of the subspace (its lowest monomials),
    so this is enough to decide spanning and top-degree inclusions without
    building the reduced basis.
    """
    _check_dim(context.nvars, L, max_dim)
    pack = _packing(context.nvars, L)
    rows = itertools.chain.from_iterable(
        _generator_rows(part, context, L, pack) for part in parts)
    return frozenset(_echelon(rows))


def sum_of_modules(parts: Sequence[ModulePart], context: RingContext, L: int,
                   max_dim: int | None = None) -> SubspaceBasis:
    _check_dim(context.nvars, L, max_dim)
    pack = _packing(context.nvars, L)
    rows = itertools.chain.from_iterable(
        _generator_rows(part, context, L, pack) for part in parts)
    return SubspaceBasis(context, L, _fully_reduce(_echelon(rows)))


def module_span(generators: Sequence[JetPoly], multiplier_vars: Sequence[str | int] | None = None,
                min_multiplier_degree: int = 0, L: int | None = None,
                context: RingContext | None = None, max_dim: int | None = None) -> SubspaceBasis:
    """Row-reduced span of ``g * mu`` truncated at ``L``.

    ``mu`` runs over monomials in ``multiplier_vars`` (all variables when
    None) of degree at least ``min_multiplier_degree``: 1 gives a maximal-ideal
    coefficient module, 0 a module over the (sub)ring.
    """
    if min_multiplier_degree < 0:
        raise ValueError("min_multiplier_degree must be >= 0")
    gens = tuple(generators)
    if context is None:
        if not gens:
            raise ValueError("context is required for an empty generator list")
        context = gens[0].context
    if L is None:
        if not gens:
            raise ValueError("truncation L is required for an empty generator list")
        L = gens[0].truncation
    mv = None if multiplier_vars is None else tuple(multiplier_vars)
    return sum_of_modules([ModulePart(gens, mv, min_multiplier_degree)], context, L, max_dim)


def contains(basis: SubspaceBasis, p: JetPoly) -> MembershipReport:
    """Reduce ``p`` against the basis in one pass over increasing pivots."""
    if p.context != basis.context or p.truncation != basis.truncation:
        raise ContextMismatch("jet and basis live in different jet spaces")
    pack = basis._pack
    cur = {pack.pack(m): c for m, c in p.items()}
    residue = {}
    rows = basis._rows
    while cur:
        head = min(cur)
        c = cur.pop(head)
        row = rows.get(head)
        if row is None:
            residue[head] = c
            continue
        for k, a in row.items():
            if k == head:
                continue
            v = cur.get(k, 0) - c * a
            if v:
                cur[k] = v
            else:
                cur.pop(k, None)
    res = JetPoly(p.context, p.truncation, {pack.unpack(k): c for k, c in residue.items()})
    return MembershipReport(res.is_zero(), res, quotient_cobasis(basis))


def _cobasis_keys(context: RingContext, L: int, pivots: Iterable[int]) -> list[int]:
    pack = _packing(context.nvars, L)
    piv = set(pivots)
    return [k for k in pack.monomial_keys(tuple(range(context.nvars)), 0, L) if k not in piv]


def quotient_cobasis(basis: SubspaceBasis) -> tuple[Monomial, ...]:
    """Monomials of degree <= L that are not pivots; they span J^L / span."""
    pack = basis._pack
    return tuple(pack.unpack(k) for k in _cobasis_keys(basis.context, basis.truncation, basis._rows))


def cobasis_from_pivots(context: RingContext, L: int, pivots: Iterable[int]) -> tuple[Monomial, ...]:
    pack = _packing(context.nvars, L)
    return tuple(pack.unpack(k) for k in _cobasis_keys(context, L, pivots))


def pivot_monomials(context: RingContext, L: int, pivots: Iterable[int]) -> set[Monomial]:
    pack = _packing(context.nvars, L)
    return {pack.unpack(k) for k in pivots}


def all_monomials(context: RingContext, L: int, degree: int | None = None) -> list[Monomial]:
    pack = _packing(context.nvars, L)
    lo, hi = (0, L) if degree is None else (degree, degree)
    return [pack.unpack(k) for k in pack.monomial_keys(tuple(range(context.nvars)), lo, hi)]


def rank_of(polys: Sequence[JetPoly]) -> int:
    """Exact rank of a list of jets viewed as vectors."""
    if not polys:
        return 0
    ctx = polys[0].context
    L = max(p.truncation for p in polys)
    pack = _packing(ctx.nvars, L)
    return len(_echelon(_int_row(p.with_truncation(L), pack) for p in polys if p))


# ---------------------------------------------------------------------------
# text grammar

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


class _Parser:
    """Recursive-descent parser for ``coeff * x1^a y2^b ...`` style input.

    Supports + - * / ^ ** and parentheses; juxtaposition multiplies.  Division
    is only allowed by a nonzero constant.
    """

    def __init__(self, text: str, context: RingContext, L: int):
        self.context = context
        self.L = L
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> list[tuple[str, str]]:
        out = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise JetParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
            num, name, op = m.groups()
            if num is not None:
                out.append(("num", num))
            elif name is not None:
                out.append(("name", name))
            elif op is not None:
                out.append(("op", "^" if op == "**" else op))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        if not out:
            raise JetParseError("empty polynomial text")
        return out

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> JetPoly:
        value = self.expr()
        if self.pos != len(self.tokens):
            raise JetParseError(f"trailing input near token {self.peek()[1]!r}")
        return value

    def expr(self) -> JetPoly:
        value = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> JetPoly:
        value = self.unary()
        while True:
            kind, tok = self.peek()
            if kind == "op" and tok == "*":
                self.take()
                value = value * self.unary()
            elif kind == "op" and tok == "/":
                self.take()
                div = self.unary()
                if div.degree > 0 or div.is_zero():
                    raise JetParseError("division only by a nonzero constant")
                value = value * (1 / div.constant_term)
            elif kind in ("num", "name") or (kind == "op" and tok == "("):
                value = value * self.unary()
            else:
                return value

    def unary(self) -> JetPoly:
        kind, tok = self.peek()
        if kind == "op" and tok in "+-":
            self.take()
            inner = self.unary()
            return -inner if tok == "-" else inner
        return self.power()

    def power(self) -> JetPoly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, tok = self.take()
            if kind != "num" or not tok.isdigit():
                raise JetParseError("exponent must be a non-negative integer")
            return base ** int(tok)
        return base

    def atom(self) -> JetPoly:
        kind, tok = self.take()
        if kind == "num":
            return JetPoly.constant(self.context, self.L, Fraction(tok))
        if kind == "name":
            try:
                return JetPoly.variable(self.context, self.L, tok)
            except ValueError as exc:
                raise JetParseError(str(exc)) from None
        if (kind, tok) == ("op", "("):
            value = self.expr()
            if self.take() != ("op", ")"):
                raise JetParseError("missing closing parenthesis")
            return value
        raise JetParseError(f"unexpected token {tok!r}")


def parse_jet(text: str, context: RingContext, truncation: int) -> JetPoly:
    return JetPoly.parse(text, context, truncation)
