"""Normal forms of generic wavefront bifurcations on a corner, and recognition.

Two lists are covered: no corner (r = 0) with up to four q-parameters, and a
boundary (r = 1) with up to two.  Each ``NormalFormEntry`` is one concrete
instantiation: signs and variant fixed, using exactly ``n`` q-parameters.
"""
from __future__ import annotations

import itertools
import os
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .equivalence import K_codimension, determinacy_order
from .jetalg import JetPoly, RingContext
from .stability import check_generating_family_stable, family_context, is_PC_nondegenerate

N_MAX = {0: 4, 1: 2}
TEMPLATE_TRUNCATION = 6  # every template has degree <= 5


@dataclass(frozen=True)
class NormalFormEntry:
    family: str                  # e.g. "1D4"; label adds the leading sign
    r: int
    k: int
    n: int
    variant_index: int
    sign_slots: tuple[int, ...]  # first slot is the label sign for "±" families
    template: str                # "{s0}", "{s1}", ... stand for the signs
    signed_label: bool = False
    base_germ_text: str = ""

    @property
    def label(self) -> str:
        if self.signed_label:
            return self.family + ("+" if self.sign_slots[0] > 0 else "-")
        return self.family

    @property
    def text(self) -> str:
        out = self.template
        for i, s in enumerate(self.sign_slots):
            out = out.replace("{s%d}" % i, "+" if s > 0 else "-")
        return out[1:] if out.startswith("+") else out

    @property
    def has_t(self) -> bool:
        return self.family.startswith("1")

    @property
    def context(self) -> RingContext:
        return family_context(self.r, self.k, self.n, with_t=True)

    def polynomial(self) -> JetPoly:
        return JetPoly.parse(self.text, self.context, TEMPLATE_TRUNCATION)

    def base_germ(self) -> JetPoly:
        """F|_{t=q=z=0} in E(r;k)."""
        return self.polynomial().transfer(RingContext(r=self.r, k=self.k))

    @property
    def key(self) -> str:
        """Unique id: label, variant and any extra signs."""
        extra = self.sign_slots[1:] if self.signed_label else self.sign_slots
        tag = "".join("+" if s > 0 else "-" for s in extra)
        return f"{self.label}/v{self.variant_index}" + (f"/{tag}" if tag else "")

    def to_json(self) -> dict:
        return {"label": self.label, "key": self.key, "polynomial": self.text,
                "r": self.r, "n": self.n, "k": self.k,
                "variant": self.variant_index, "signs": list(self.sign_slots)}


@dataclass(frozen=True)
class _Family:
    name: str
    r: int
    k: int
    base: str
    variants: tuple[tuple[str, int], ...]   # (template, n), variant 1, 2, ...
    signed: bool = False


_FAMILIES: tuple[_Family, ...] = (
    # r = 0
    _Family("0D4", 0, 2, "y1^2*y2 {s0} y2^3",
            (("y1^2*y2 {s0} y2^3 + q1*y2^2 + q2*y2 + q3*y1 + z", 3),), signed=True),
    _Family("0D5", 0, 2, "y1^2*y2 + y2^4",
            (("y1^2*y2 + y2^4 + q1*y2^3 + q2*y2^2 + q3*y2 + q4*y1 + z", 4),)),
    _Family("1D4", 0, 2, "y1^2*y2 {s0} y2^3",
            (("y1^2*y2 {s0} y2^3 + t*y2^2 + q1*y2 + q2*y1 + z", 2),
             ("y1^2*y2 {s0} y2^3 + (t + q3^2)*y2^2 + q1*y2 + q2*y1 + z", 3)), signed=True),
    _Family("1D5", 0, 2, "y1^2*y2 + y2^4",
            (("y1^2*y2 + y2^4 + t*y2^3 + q1*y2^2 + q2*y2 + q3*y1 + z", 3),
             ("y1^2*y2 + y2^4 + (t + q4^2)*y2^3 + q1*y2^2 + q2*y2 + q3*y1 + z", 4))),
    # the t-term multiplies y2^4; with y2^6 the family is not stable
    _Family("1D6", 0, 2, "y1^2*y2 {s0} y2^5",
            (("y1^2*y2 {s0} y2^5 + t*y2^4 + q1*y2^3 + q2*y2^2 + q3*y2 + q4*y1 + z", 4),),
            signed=True),
    _Family("1E6", 0, 2, "y1^3 + y2^4",
            (("y1^3 + y2^4 + t*y1*y2^2 + q1*y1*y2 + q2*y2^2 + q3*y1 + q4*y2 + z", 4),)),
    # r = 1
    _Family("0B2", 1, 0, "x^2", (("x^2 + q1*x + z", 1),)),
    _Family("0B3", 1, 0, "x^3", (("x^3 + q1*x^2 + q2*x + z", 2),)),
    _Family("0C3", 1, 1, "{s0}x*y + y^3",
            (("{s0}x*y + y^3 + q1*y^2 + q2*y + z", 2),), signed=True),
    _Family("1B3", 1, 0, "x^3",
            (("x^3 + t*x^2 + q1*x + z", 1), ("x^3 + (t + q2^2)*x^2 + q1*x + z", 2))),
    _Family("1B4", 1, 0, "x^4", (("x^4 + t*x^3 + q1*x^2 + q2*x + z", 2),)),
    _Family("1C3", 1, 1, "{s0}x*y + y^3",
            (("{s0}x*y + y^3 + t*y^2 + q1*y + z", 1),
             ("{s0}x*y + y^3 + (t + q2^2)*y^2 + q1*y + z", 2)), signed=True),
    _Family("1C4", 1, 1, "x*y + y^4", (("x*y + y^4 + t*y^3 + q1*y^2 + q2*y + z", 2),)),
    _Family("1F4", 1, 1, "x^2 + y^3", (("x^2 + y^3 + t*x*y + q1*x + q2*y + z", 2),)),
)

_LABEL_RE = re.compile(r"^([01])([A-Z])(\d+)([+-]?)$")


def _power_term(i: int) -> str:
    return f"q{i}*y" if i == 1 else f"q{i}*y^{i}"


def _a_series(r: int, n: int) -> list[NormalFormEntry]:
    """The A_l families, which depend on l and n rather than fixed templates."""
    if r != 0:
        return []
    out = []
    for l in range(2, n + 1):
        lower = " + ".join(_power_term(i) for i in range(1, l + 1))
        out.append(NormalFormEntry(f"0A{l}", 0, 1, l, 1, (),
                                   f"y^{l + 1} + {lower} + z", base_germ_text=f"y^{l + 1}"))
    for l in range(3, n + 1):
        lower = " + ".join(_power_term(i) for i in range(1, l))
        for n_used in range(l, n + 1):
            extra = n_used - l
            for signs in itertools.product((1, -1), repeat=extra):
                squares = "".join(" {s%d} q%d^2" % (j, l + 1 + j) for j in range(extra))
                template = f"y^{l + 1} + (t + q{l}^2{squares})*y^{l - 1} + {lower} + z"
                out.append(NormalFormEntry(f"1A{l}", 0, 1, n_used, extra + 1, signs,
                                           template, base_germ_text=f"y^{l + 1}"))
    return out


def _check_rn(r: int, n: int) -> None:
    if r not in N_MAX:
        raise ValueError(f"no catalog for r={r}; supported r are 0 and 1")
    if n < 1 or n > N_MAX[r]:
        raise ValueError(f"catalog for r={r} covers 1 <= n <= {N_MAX[r]}")


def list_entries(r: int, n: int | None = None) -> list[NormalFormEntry]:
    """All instantiations for corner count r needing at most n q-parameters."""
    if n is None:
        n = N_MAX.get(r, 0)
    _check_rn(r, n)
    out = _a_series(r, n)
    for fam in _FAMILIES:
        if fam.r != r:
            continue
        for v, (template, n_used) in enumerate(fam.variants, start=1):
            if n_used > n:
                continue
            for signs in ([(1,), (-1,)] if fam.signed else [()]):
                out.append(NormalFormEntry(fam.name, r, fam.k, n_used, v, signs, template,
                                           fam.signed, fam.base))
    return out


def all_entries() -> list[NormalFormEntry]:
    return list_entries(0) + list_entries(1)


def _parse_label(label: str) -> tuple[str, int | None]:
    m = _LABEL_RE.match(label.strip())
    if not m:
        raise ValueError(f"malformed label {label!r}")
    family = "".join(m.group(1, 2, 3))
    sign = {"+": 1, "-": -1, "": None}[m.group(4)]
    return family, sign


def find_entry(label: str, signs: tuple[int, ...] | None = None,
               variant: int = 1, n: int | None = None) -> NormalFormEntry:
    """Look up an entry; ``label`` may carry the leading sign ("0C3-").

    For the A_l families without t, n defaults to l; for ``1A_l`` variant v
    uses l + v - 1 parameters and takes v - 1 signs.
    """
    family, sign = _parse_label(label)
    signs = tuple(signs) if signs is not None else ()
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +1 or -1")
    candidates = [e for e in all_entries() if e.family == family]
    if not candidates:
        raise ValueError(f"unknown label {label!r}")
    signed = candidates[0].signed_label
    if signed:
        if sign is not None:
            if signs and signs[0] != sign:
                raise ValueError("sign in label disagrees with the sign vector")
            signs = (sign,) + signs[1:] if signs else (sign,)
        elif not signs:
            raise ValueError(f"{family} needs a sign: {family}+ or {family}-")
    elif sign is not None:
        raise ValueError(f"{family} has no sign variants")
    for e in candidates:
        if e.variant_index == variant and e.sign_slots == signs and (n is None or e.n == n):
            return e
    arity = {len(e.sign_slots) for e in candidates if e.variant_index == variant}
    if not arity:
        raise ValueError(f"{family} has no variant {variant}")
    raise ValueError(f"{family} variant {variant} takes {sorted(arity)} sign(s), got {len(signs)}")


def instantiate(label: str, signs: tuple[int, ...] | None = None, variant: int = 1) -> JetPoly:
    return find_entry(label, signs, variant).polynomial()


def export_catalog_json(entries: list[NormalFormEntry] | None = None) -> list[dict]:
    """Entries grouped by label: polynomial text of every variant."""
    entries = all_entries() if entries is None else entries
    grouped: dict[str, dict] = {}
    for e in entries:
        row = grouped.setdefault(e.label, {"label": e.label, "r": e.r, "k": e.k,
                                           "base_germ": e.base_germ().to_text(),
                                           "variants": []})
        row["variants"].append({"variant": e.variant_index, "n": e.n,
                                "signs": list(e.sign_slots), "polynomial": e.text})
    return list(grouped.values())


# ---------------------------------------------------------------------------
# verification


@dataclass
class EntryCheck:
    entry: NormalFormEntry
    pc_nondegenerate: bool
    stable: bool | None
    truncation: int | None
    cobasis: tuple[str, ...]
    seconds: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.pc_nondegenerate and self.stable is True

    def to_json(self) -> dict:
        return {**self.entry.to_json(), "pc_nondegenerate": self.pc_nondegenerate,
                "stable": self.stable, "truncation": self.truncation,
                "cobasis": list(self.cobasis), "error": self.error,
                "passed": self.passed}


@dataclass
class CatalogReport:
    checks: list[EntryCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[EntryCheck]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"all_passed": self.all_passed, "entries": [c.to_json() for c in self.checks]}

    def table(self) -> str:
        lines = [f"{'entry':<16} {'n':>2} {'L':>3} {'PC':>3} {'stable':>6}  polynomial"]
        for c in self.checks:
            lines.append(f"{c.entry.key:<16} {c.entry.n:>2} {c.truncation or '-':>3} "
                         f"{'yes' if c.pc_nondegenerate else 'no':>3} "
                         f"{str(c.stable):>6}  {c.entry.text}")
        return "\n".join(lines)


def check_entry(entry: NormalFormEntry, L: int | None = None,
                F: JetPoly | None = None) -> EntryCheck:
    """PC-non-degeneracy and stability of one entry (or a mutated polynomial F)."""
    t0 = time.perf_counter()
    F = entry.polynomial() if F is None else F
    pc = is_PC_nondegenerate(F)
    if not pc:
        return EntryCheck(entry, False, None, None, (), time.perf_counter() - t0,
                          "not P-C-non-degenerate")
    rep = check_generating_family_stable(F, L, label=entry.label)
    return EntryCheck(entry, True, rep.stable, rep.truncation_used,
                      tuple(m.render(F.context) for m in rep.residue_cobasis),
                      time.perf_counter() - t0)


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("RETFRONT_THREADS", "1")))
    except ValueError:
        return 1


def verify_catalog(entries: list[NormalFormEntry] | None = None,
                   workers: int | None = None) -> CatalogReport:
    entries = all_entries() if entries is None else entries
    workers = _worker_count() if workers is None else workers
    if workers > 1 and len(entries) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            checks = list(pool.map(check_entry, entries))
    else:
        checks = [check_entry(e) for e in entries]
    return CatalogReport(checks)


# ---------------------------------------------------------------------------
# recognition


@dataclass(frozen=True)
class Fingerprint:
    r: int
    corank: int
    codimension: int
    hilbert: tuple[int, ...]

    def to_json(self) -> dict:
        return {"r": self.r, "corank": self.corank, "codimension": self.codimension,
                "hilbert": list(self.hilbert)}


@dataclass(frozen=True)
class Recognition:
    family: str | None          # "C3", "D4", ...; None when unclassified
    sign: str | None            # "+", "-" or None
    candidates: tuple[str, ...]  # signed family names consistent with the germ
    entries: tuple[str, ...]     # catalog labels built on this germ
    fingerprint: Fingerprint | None
    reason: str = ""

    @property
    def classified(self) -> bool:
        return self.family is not None

    @property
    def label(self) -> str | None:
        if self.family is None:
            return None
        return self.family + (self.sign or "")

    def to_json(self) -> dict:
        return {"family": self.family, "sign": self.sign, "label": self.label,
                "candidates": list(self.candidates), "entries": list(self.entries),
                "fingerprint": self.fingerprint.to_json() if self.fingerprint else None,
                "reason": self.reason}


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Kernel basis of a small exact matrix."""
    m = [list(r) for r in rows]
    pivots = []
    row = 0
    for col in range(ncols):
        p = next((i for i in range(row, len(m)) if m[i][col] != 0), None)
        if p is None:
            continue
        m[row], m[p] = m[p], m[row]
        piv = m[row][col]
        m[row] = [v / piv for v in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fcol]
        basis.append(v)
    return basis


def _y_hessian(f0: JetPoly) -> list[list[Fraction]]:
    ys = list(f0.context.role_indices("y"))
    nv = f0.context.nvars
    H = []
    for a in ys:
        row = []
        for b in ys:
            e = [0] * nv
            e[a] += 1
            e[b] += 1
            c = f0.coefficient(e)
            row.append(c * 2 if a == b else c)
        H.append(row)
    return H


def _cubic_on(f0: JetPoly, vecs: list[list[Fraction]], x_coeff: bool = False):
    """Evaluate the 3-jet on a linear combination of kernel vectors (exact)."""
    ctx = f0.context
    ys = list(ctx.role_indices("y"))
    s = RingContext(r=0, k=len(vecs))
    L = 3
    images = []
    for i in range(ctx.nvars):
        if i in ys:
            j = ys.index(i)
            terms = {}
            for a, v in enumerate(vecs):
                if v[j]:
                    e = [0] * len(vecs)
                    e[a] = 1
                    terms[tuple(e)] = v[j]
            images.append(JetPoly(s, L, terms))
        else:
            images.append(JetPoly.zero(s, L))
    return f0.with_truncation(L).homogeneous_part(3).compose(images)


def _fingerprint(f0: JetPoly) -> tuple[Fingerprint, list[list[Fraction]]]:
    ctx = f0.context
    H = _y_hessian(f0)
    kernel = _nullspace(H, ctx.k) if ctx.k else []
    corank = len(kernel)
    kc = K_codimension(f0)
    shift = ctx.k - corank
    hil = list(kc.hilbert())
    if len(hil) > 1:
        hil[1] -= shift
    while len(hil) > 1 and hil[-1] == 0:
        hil.pop()
    return Fingerprint(ctx.r, corank, kc.dim - shift, tuple(hil)), kernel


def fingerprint(f0: JetPoly) -> Fingerprint:
    """Invariants of a germ under stable reticular K-equivalence.

    Adding a nondegenerate square in a fresh y-variable raises the codimension
    and the degree-one Hilbert count by one each (the y-derivative module has
    maximal-ideal coefficients), so both are normalized by the Morse rank.
    """
    return _fingerprint(f0)[0]


def _catalog_germs() -> dict[str, tuple[str, int, int, str]]:
    """Signed family name -> (base germ text, r, k, smallest n available)."""
    out: dict[str, tuple[str, int, int, str]] = {}
    for e in all_entries():
        name = e.label[1:]
        base = e.base_germ_text
        if e.signed_label:
            base = base.replace("{s0}", "+" if e.sign_slots[0] > 0 else "-")
        prev = out.get(name)
        out[name] = (base, e.r, e.k, min(e.n, prev[3]) if prev else e.n)
    return out


_TABLE_CACHE: dict[str, tuple[Fingerprint, int, int, int]] | None = None


def fingerprint_table() -> dict[str, tuple[Fingerprint, int, int, int]]:
    """Signed family -> (fingerprint, r, k, smallest n) for the catalog germs."""
    global _TABLE_CACHE
    if _TABLE_CACHE is None:
        table = {}
        for name, (text, r, k, n_min) in sorted(_catalog_germs().items()):
            f0 = JetPoly.parse(text, RingContext(r=r, k=k), TEMPLATE_TRUNCATION)
            table[name] = (fingerprint(f0), r, k, n_min)
        _TABLE_CACHE = table
    return _TABLE_CACHE


def _sign_test(family: str, f0: JetPoly, kernel) -> str | None:
    """Real invariant separating the ± forms, or None when unavailable."""
    if family == "C3" and len(kernel) == 1:
        v = kernel[0]
        ctx = f0.context
        xs = list(ctx.role_indices("x"))
        ys = list(ctx.role_indices("y"))
        cxv = Fraction(0)
        for j, yi in enumerate(ys):
            e = [0] * ctx.nvars
            e[xs[0]] += 1
            e[yi] += 1
            cxv += f0.coefficient(e) * v[j]
        cubic = _cubic_on(f0, kernel)
        cvvv = cubic.coefficient((3,))
        prod = cxv * cvvv
        return None if prod == 0 else ("+" if prod > 0 else "-")
    if family == "D4" and len(kernel) == 2:
        c = _cubic_on(f0, kernel)
        a, b, cc, d = (c.coefficient(e) for e in ((3, 0), (2, 1), (1, 2), (0, 3)))
        disc = 18 * a * b * cc * d - 4 * b ** 3 * d + b * b * cc * cc - 4 * a * cc ** 3 - 27 * a * a * d * d
        if disc == 0:
            return None
        # three real lines through the origin: y1^2*y2 - y2^3
        return "-" if disc > 0 else "+"
    return None


def recognize(f0: JetPoly, n: int | None = None) -> Recognition:
    """Match a germ in M(r;k) against the catalog by fingerprint.

    ``n`` restricts the table to families with an entry using at most n
    q-parameters.  D6+ and D6- share all fingerprint invariants and no sign
    test separates them here, so both are returned as candidates.
    """
    ctx = f0.context
    if ctx.m or ctx.n:
        raise ValueError("recognize expects a germ in E(r;k)")
    if f0.is_zero():
        return Recognition(None, None, (), (), None, "zero germ")
    if f0.constant_term != 0:
        raise ValueError("germ has a nonzero constant term")
    verdict = determinacy_order(f0)
    if not verdict.determined:
        return Recognition(None, None, (), (), None, "not finitely determined within l_max")
    fp, kernel = _fingerprint(f0)
    matches = [name for name, (tfp, r, k, n_min) in fingerprint_table().items()
               if tfp == fp and (n is None or n_min <= n)]
    if not matches:
        return Recognition(None, None, (), (), fp, "no catalog fingerprint matches")
    families = {m.rstrip("+-") for m in matches}
    if len(families) != 1:
        return Recognition(None, None, tuple(matches), (), fp, "fingerprint collision")
    family = families.pop()
    entries = tuple(sorted({e.label for e in all_entries()
                            if e.label[1:].rstrip("+-") == family
                            and (n is None or e.n <= n)}))
    if len(matches) == 1:
        name = matches[0]
        sign = name[-1] if name[-1] in "+-" else None
        return Recognition(family, sign, (name,), entries, fp)
    sign = _sign_test(family, f0, kernel)
    if sign is None:
        return Recognition(family, None, tuple(matches), entries, fp,
                           "sign variants share the fingerprint")
    entries = tuple(e for e in entries if e.endswith(sign))
    return Recognition(family, sign, (family + sign,), entries, fp)
