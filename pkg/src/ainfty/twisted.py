"""Equivariant twisted complexes over a finite A-infinity category.

A twisted complex is a list of summands (object, shift, character twist)
with a strictly triangular degree-1 weight-0 connection delta satisfying
the generalized Maurer-Cartan equation.  Conventions:

* [n] lowers degree by n: a component of raw degree r between summands
  (X, s, u) -> (Y, t, w) has total degree r + s - t and total weight
  raw_weight + u - w.
* Compositions of matrix entries use the base category's mu with one
  extra sign (-1)^{shift of the source summand of the rightmost factor}.
* With that rule the identity of (C, delta) is sum_f (-1)^{s_f} e_f.
"""

import json
from fractions import Fraction

from .category import (AInftyStructure, Report, is_unit, lc_add, unit_name)
from .linalg import SparseMatrix, CochainComplex, rat, rat_str, reduce


class TwObject:
    """Twisted complex: summands [(object, shift, twist)], delta sparse."""

    def __init__(self, base, summands, delta=None, name=None):
        self.base = base
        self.summands = []
        for obj, shift, twist in summands:
            twist = tuple(int(t) for t in twist)
            if len(twist) != base.base.weight_rank:
                raise ValueError("twist has wrong rank")
            self.summands.append((obj, int(shift), twist))
        self.delta = {}
        self.name = name
        if delta:
            for (row, col), lc in delta.items():
                lc = {k: Fraction(v) for k, v in lc.items() if Fraction(v)}
                if lc:
                    if not (0 <= row < len(self.summands)
                            and 0 <= col < len(self.summands)):
                        raise ValueError("delta index out of range")
                    self.delta[(row, col)] = lc

    def n(self):
        return len(self.summands)

    def shifted(self, n):
        """The translate [n] (summand shifts increased by n)."""
        return TwObject(self.base,
                        [(o, s + n, w) for o, s, w in self.summands],
                        dict(self.delta))

    def twisted_by(self, weight):
        """Tensor with the character of the given weight."""
        weight = tuple(weight)
        return TwObject(self.base,
                        [(o, s, tuple(a + b for a, b in zip(w, weight)))
                         for o, s, w in self.summands],
                        dict(self.delta))

    def component_degree(self, row, col, name):
        b = self.base.base
        return (b.degree(name) + self.summands[col][1]
                - self.summands[row][1])

    def component_weight(self, row, col, name):
        b = self.base.base
        wn = b.weight(name)
        ws = self.summands[col][2]
        wt = self.summands[row][2]
        return tuple(a + b_ - c for a, b_, c in zip(wn, ws, wt))


def trivial_tw(a, obj, shift=0, twist=None, name=None):
    if twist is None:
        twist = a.base.zero_weight()
    return TwObject(a, [(obj, shift, twist)], {}, name=name or str(obj))


class TwMorphism:
    """Morphism of twisted complexes; components[(row_t, col_s)] = lincomb."""

    def __init__(self, source, target, degree, components):
        self.source = source
        self.target = target
        self.degree = int(degree)
        self.components = {}
        for (t, s), lc in components.items():
            lc = {k: Fraction(v) for k, v in lc.items() if Fraction(v)}
            if lc:
                self.components[(t, s)] = lc


def identity_tw(c):
    comps = {(f, f): {unit_name(c.summands[f][0]): Fraction((-1) ** c.summands[f][1])}
             for f in range(c.n())}
    return TwMorphism(c, c, 0, comps)


def _paths(factors):
    """Contract a right-to-left list of sparse matrix factors.

    factors[0] is the rightmost (first along composition); each factor is
    a dict (row, col) -> lincomb.  Yields (row, col0, names_tuple, coeff)
    with names in composition order.
    """
    paths = {}
    for (r, c), lc in factors[0].items():
        for n, v in lc.items():
            paths.setdefault((r, c), []).append(((n,), v))
    for fac in factors[1:]:
        nxt = {}
        for (r, c), lc in fac.items():
            for (pr, pc), items in paths.items():
                if pr != c:
                    continue
                for n, v in lc.items():
                    for names, coeff in items:
                        nxt.setdefault((r, pc), []).append(
                            (names + (n,), coeff * v))
        paths = nxt
        if not paths:
            break
    for (r, c), items in paths.items():
        for names, coeff in items:
            yield r, c, names, coeff


def mu_tw(morphisms, objects):
    """mu^d of Tw on components, with all delta insertions.

    morphisms: list of d component dicts, composition order;
    objects: the d+1 twisted complexes X_0, ..., X_d.
    Returns a component dict (row in X_d, col in X_0) -> lincomb.
    """
    base = objects[0].base
    max_order = base.max_order()
    if base.base.strict_units:
        max_order = max(max_order, 2)
    d = len(morphisms)
    deltas = [obj.delta for obj in objects]
    out = {}

    def insertions(slot, remaining):
        # choose j_slot >= 0 insertions of delta_{slot} (0 = before a_1)
        if slot == d:
            for j in range(remaining + 1):
                yield (j,)
            return
        for j in range(remaining + 1):
            for rest in insertions(slot + 1, remaining - j):
                yield (j,) + rest

    for pattern in insertions(0, max_order - d):
        total = d + sum(pattern)
        if total > max_order or total < 1:
            continue
        factors = []
        ok = True
        for slot in range(d + 1):
            factors.extend([deltas[slot]] * pattern[slot])
            if slot < d:
                factors.append(morphisms[slot])
        if any(not f for f in factors):
            continue
        for r, c, names, coeff in _paths(factors):
            sign = Fraction((-1) ** objects[0].summands[c][1])
            val = base.mu_names(names)
            if val:
                for n, v in val.items():
                    slot_lc = out.setdefault((r, c), {})
                    nv = slot_lc.get(n, Fraction(0)) + sign * coeff * v
                    if nv:
                        slot_lc[n] = nv
                    else:
                        del slot_lc[n]
    return {k: v for k, v in out.items() if v}


def mu1_tw(m):
    """Differential of a morphism of twisted complexes."""
    return mu_tw([m.components], [m.source, m.target])


def mu2_tw(m2, m1):
    """Composition mu^2_Tw(m2, m1) for m1: A->B, m2: B->C."""
    return mu_tw([m1.components, m2.components],
                 [m1.source, m1.target, m2.target])


def _toposort(c):
    """Order summands so delta is strictly lower triangular, or None."""
    n = c.n()
    succ = {i: set() for i in range(n)}
    indeg = {i: 0 for i in range(n)}
    for (r, col) in c.delta:
        if r == col:
            return None
        if r not in succ[col]:
            succ[col].add(r)
            indeg[r] += 1
    order = []
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    while ready:
        i = ready.pop(0)
        order.append(i)
        for j in sorted(succ[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort()
    return order if len(order) == n else None


def mc_check(c):
    """Triangularity, homogeneity and the Maurer-Cartan equation."""
    rep = Report("maurer-cartan")
    if _toposort(c) is None:
        rep.fail("delta is not strictly triangular for any summand order")
        return rep
    zero_w = c.base.base.zero_weight()
    for (r, col), lc in sorted(c.delta.items()):
        b = c.base.base
        for name in sorted(lc):
            if (b.src(name) != c.summands[col][0]
                    or b.dst(name) != c.summands[r][0]):
                rep.fail(("entry endpoints", r, col, name))
                continue
            if c.component_degree(r, col, name) != 1:
                rep.fail(("entry degree", r, col, name))
            if c.component_weight(r, col, name) != zero_w:
                rep.fail(("entry weight", r, col, name))
    if not rep.ok:
        return rep
    mc = mu_tw([], [c])
    for (r, col), lc in sorted(mc.items()):
        rep.fail(("mc component", r, col,
                  {k: rat_str(v) for k, v in sorted(lc.items())}))
    return rep


class HomComplex:
    """Cochain complex hom_Tw(c0, c1) with its basis bookkeeping."""

    def __init__(self, c0, c1):
        if c0.base is not c1.base:
            raise ValueError("twisted complexes over different categories")
        self.c0 = c0
        self.c1 = c1
        base = c0.base.base
        self.basis = []
        for s, (os_, ss, ws) in enumerate(c0.summands):
            for t, (ot, st, wt) in enumerate(c1.summands):
                for name in base.pair_basis(os_, ot, with_units=True):
                    self.basis.append((t, s, name))
        self.index = {b: i for i, b in enumerate(self.basis)}
        self.degrees = []
        self.weights = []
        for t, s, name in self.basis:
            self.degrees.append(base.degree(name) + c0.summands[s][1]
                                - c1.summands[t][1])
            wn = base.weight(name)
            self.weights.append(tuple(
                a + b - c for a, b, c in
                zip(wn, c0.summands[s][2], c1.summands[t][2])))
        n = len(self.basis)
        self.d = SparseMatrix(n, n)
        for col, (t, s, name) in enumerate(self.basis):
            img = mu_tw([{(t, s): {name: Fraction(1)}}], [c0, c1])
            for (tt, ss), lc in img.items():
                for out, v in lc.items():
                    row = self.index.get((tt, ss, out))
                    if row is None:
                        raise ValueError(
                            f"differential leaves the basis at {(tt, ss, out)}")
                    self.d.add_to(row, col, v)

    def element(self, vec):
        """Dense coefficient vector -> TwMorphism components."""
        comps = {}
        for i, v in enumerate(vec):
            if v:
                t, s, name = self.basis[i]
                comps.setdefault((t, s), {})
                comps[(t, s)][name] = comps[(t, s)].get(name, Fraction(0)) + v
        return comps

    def vector(self, components):
        vec = [Fraction(0)] * len(self.basis)
        for (t, s), lc in components.items():
            for name, v in lc.items():
                vec[self.index[(t, s, name)]] += v
        return vec

    def cochain(self, weight=None):
        """Split by degree into a CochainComplex (optionally one weight)."""
        sel = [i for i in range(len(self.basis))
               if weight is None or self.weights[i] == weight]
        by_deg = {}
        pos = {}
        for i in sel:
            k = self.degrees[i]
            pos[i] = len(by_deg.setdefault(k, []))
            by_deg[k].append(i)
        dims = {k: len(v) for k, v in by_deg.items()}
        diffs = {}
        for k in sorted(by_deg):
            if k + 1 not in by_deg:
                m = SparseMatrix(0, dims[k])
            else:
                m = SparseMatrix(dims[k + 1], dims[k])
                for j, col in enumerate(by_deg[k]):
                    for row in by_deg[k + 1]:
                        v = self.d[row, col]
                        if v:
                            m[pos[row], j] = v
            diffs[k] = m
        return CochainComplex(dims, diffs, check=True)

    def homology_dims(self):
        return self.cochain().homology()

    def weight_decomposition(self):
        """{(degree, weight): dimension of hom} (cochain level)."""
        out = {}
        for i in range(len(self.basis)):
            key = (self.degrees[i], self.weights[i])
            out[key] = out.get(key, 0) + 1
        return out

    def closed_degree_vectors(self, degree, weight=None):
        """Basis of ker(d) in the given degree (and weight, if given)."""
        sel = [i for i in range(len(self.basis))
               if self.degrees[i] == degree
               and (weight is None or self.weights[i] == weight)]
        tgt = [i for i in range(len(self.basis))
               if self.degrees[i] == degree + 1]
        m = SparseMatrix(len(tgt), len(sel))
        tpos = {i: r for r, i in enumerate(tgt)}
        for j, col in enumerate(sel):
            for i, r in tpos.items():
                v = self.d[i, col]
                if v:
                    m[r, j] = v
        red = reduce(m)
        out = []
        for kv in red.kernel_basis:
            vec = [Fraction(0)] * len(self.basis)
            for j, col in enumerate(sel):
                if kv[j]:
                    vec[col] = kv[j]
            out.append(vec)
        return out


def hom_complex(c0, c1, check_mc=False):
    if check_mc:
        for c in (c0, c1):
            rep = mc_check(c)
            if not rep.ok:
                raise ValueError(f"not a twisted complex: {rep.failures[:3]}")
    return HomComplex(c0, c1)


# ---------------------------------------------------------------------
def cone(m):
    """Mapping cone of a closed degree-0 morphism: source[1] (+) target."""
    if m.degree != 0:
        raise ValueError("cone needs a degree-0 morphism")
    if mu1_tw(m):
        raise ValueError("cone needs a closed morphism")
    c0, c1 = m.source, m.target
    summands = [(o, s + 1, w) for o, s, w in c0.summands] + list(c1.summands)
    off = c0.n()
    delta = {}
    for (r, c), lc in c0.delta.items():
        delta[(r, c)] = dict(lc)
    for (r, c), lc in c1.delta.items():
        delta[(off + r, off + c)] = dict(lc)
    for (t, s), lc in m.components.items():
        delta[(off + t, s)] = dict(lc)
    return TwObject(c0.base, summands, delta)


def twist(a, x_obj, y):
    """Twist of y along the object x: the cone of the evaluation map
    hom(x, y) (x) x -> y."""
    x = trivial_tw(a, x_obj)
    hb = HomComplex(x, y)
    n = len(hb.basis)
    # one x-copy per hom basis element f_k, shifted and twisted so that
    # the evaluation component is degree 0 / weight 0
    summands = [(x_obj, -hb.degrees[k], tuple(-w for w in hb.weights[k]))
                for k in range(n)]
    delta = {}
    for l in range(n):
        for k in range(n):
            v = hb.d[l, k]
            if v:
                delta[(l, k)] = {unit_name(x_obj): -v}
    sub = TwObject(a, summands, delta)
    comps = {}
    for k, (t, s, name) in enumerate(hb.basis):
        comps.setdefault((t, k), {})
        comps[(t, k)][name] = Fraction(1)
    ev = TwMorphism(sub, y, 0, comps)
    return cone(ev)


def untwist(y, x_obj):
    """Dual twist of x along y: the cone of x -> hom(x, y)^dual (x) y."""
    a = y.base
    x = trivial_tw(a, x_obj)
    hb = HomComplex(x, y)
    n = len(hb.basis)
    summands = []
    pos = {}
    for k in range(n):
        for g, (og, tg, wg) in enumerate(y.summands):
            pos[(k, g)] = len(summands)
            summands.append((og, tg + hb.degrees[k],
                             tuple(a_ + b for a_, b in zip(wg, hb.weights[k]))))
    delta = {}
    for k in range(n):
        for (r, c), lc in y.delta.items():
            delta[(pos[(k, r)], pos[(k, c)])] = dict(lc)
    for k in range(n):
        for l in range(n):
            v = hb.d[l, k]
            if not v:
                continue
            # entries copy(l) -> copy(k) on each y summand g with the sign
            # -(-1)^{d_l + t_g} forced by closedness of the coevaluation
            for g, (og, tg, wg) in enumerate(y.summands):
                sgn = Fraction(-((-1) ** (hb.degrees[l] + tg)))
                delta[(pos[(k, g)], pos[(l, g)])] = {
                    unit_name(og): sgn * v}
    dual = TwObject(a, summands, delta)
    comps = {}
    for k, (t, s, name) in enumerate(hb.basis):
        comps.setdefault((pos[(k, t)], 0), {})
        comps[(pos[(k, t)], 0)][name] = Fraction(1)
    coev = TwMorphism(x, dual, 0, comps)
    return cone(coev)


# ---------------------------------------------------------------------
def normalize_source(c0, c1):
    """Shift and twist c0 so the lowest cohomology of hom(c0, c1) sits in
    degree 0 with weight 0.  Returns (c0', degree_shift, weight_shift).

    Requires the lowest nonzero cohomology to be one-dimensional and of a
    pure weight.
    """
    hb = HomComplex(c0, c1)
    h = hb.homology_dims()
    if not h:
        raise ValueError("hom complex is acyclic; nothing to normalize")
    low = min(h)
    if h[low] != 1:
        raise ValueError(f"lowest cohomology has dimension {h[low]}, not 1")
    weights = sorted({hb.weights[i] for i in range(len(hb.basis))
                      if hb.degrees[i] == low})
    wdim = {}
    for w in weights:
        cw = hb.cochain(weight=w).homology()
        if cw.get(low):
            wdim[w] = cw[low]
    if len(wdim) != 1:
        raise ValueError(f"lowest class has mixed weights {sorted(wdim)}")
    (w, _), = wdim.items()
    out = c0.shifted(-low).twisted_by(tuple(-x for x in w))
    return out, -low, tuple(-x for x in w)


def normalize_morphism(m):
    """Shift/twist the source of a closed morphism to degree 0, weight 0."""
    src, dshift, wshift = normalize_source(m.source, m.target)
    return TwMorphism(src, m.target, 0, m.components)


# ---------------------------------------------------------------------
class QuasiIsoVerdict:
    def __init__(self, yes, witness=None, reason=""):
        self.yes = yes
        self.witness = witness
        self.reason = reason

    def __bool__(self):
        return self.yes

    def __repr__(self):
        return f"<QuasiIsoVerdict {self.yes} {self.reason}>"


def _induced_iso_everywhere(phi, c0, c1):
    """Does composition with phi induce isos H(hom(W, c0)) -> H(hom(W, c1))
    for every generator object W?"""
    base = c0.base
    for obj in base.base.objects:
        w = trivial_tw(base, obj)
        h0 = HomComplex(w, c0)
        h1 = HomComplex(w, c1)
        hd0 = h0.homology_dims()
        hd1 = h1.homology_dims()
        if hd0 != hd1:
            return False
        for degree in sorted(hd0):
            # representatives of H^degree on both sides
            reps0 = _h_reps(h0, degree)
            if len(reps0) != hd0[degree]:
                return False
            images = []
            for vec in reps0:
                psi = TwMorphism(w, c0, degree, h0.element(vec))
                img = mu_tw([psi.components, phi.components], [w, c0, c1])
                images.append(h1.vector(img))
            if not _classes_independent(h1, degree, images):
                return False
    return True


def _h_reps(hb, degree):
    """Representative vectors of a basis of H^degree(hb)."""
    closed = hb.closed_degree_vectors(degree)
    below = [i for i in range(len(hb.basis)) if hb.degrees[i] == degree - 1]
    here = [i for i in range(len(hb.basis)) if hb.degrees[i] == degree]
    hpos = {i: r for r, i in enumerate(here)}
    img = []
    for col in below:
        vec = [Fraction(0)] * len(here)
        nz = False
        for i, r in hpos.items():
            v = hb.d[i, col]
            if v:
                vec[r] = v
                nz = True
        if nz:
            img.append(vec)
    # select closed vectors independent modulo the image
    m = SparseMatrix(len(here), len(img) + len(closed))
    for j, vec in enumerate(img):
        for r, v in enumerate(vec):
            if v:
                m[r, j] = v
    for j, vec in enumerate(closed):
        for i, r in hpos.items():
            if vec[i]:
                m[r, len(img) + j] = vec[i]
    red = reduce(m)
    reps = []
    for c in red.pivot_cols:
        if c >= len(img):
            reps.append(closed[c - len(img)])
    return reps


def _classes_independent(hb, degree, vectors):
    """Are the given cocycle vectors a basis of H^degree(hb)?"""
    target_dim = hb.homology_dims().get(degree, 0)
    if len(vectors) != target_dim:
        return False
    below = [i for i in range(len(hb.basis)) if hb.degrees[i] == degree - 1]
    here = [i for i in range(len(hb.basis)) if hb.degrees[i] == degree]
    hpos = {i: r for r, i in enumerate(here)}
    cols = []
    for col in below:
        vec = [Fraction(0)] * len(here)
        for i, r in hpos.items():
            v = hb.d[i, col]
            if v:
                vec[r] = v
        cols.append(vec)
    base_rank_m = SparseMatrix(len(here), len(cols))
    for j, vec in enumerate(cols):
        for r, v in enumerate(vec):
            if v:
                base_rank_m[r, j] = v
    rank0 = reduce(base_rank_m).rank
    m = SparseMatrix(len(here), len(cols) + len(vectors))
    for j, vec in enumerate(cols):
        for r, v in enumerate(vec):
            if v:
                m[r, j] = v
    for j, vec in enumerate(vectors):
        for i, r in hpos.items():
            if vec[i]:
                m[r, len(cols) + j] = vec[i]
    return reduce(m).rank == rank0 + target_dim


def is_quasi_isomorphic(c0, c1):
    """Search for a degree-0 weight-0 closed morphism inducing isos on
    H(hom(W, .)) for every generator object W."""
    base = c0.base
    hb = HomComplex(c0, c1)
    zero_w = base.base.zero_weight()
    closed = hb.closed_degree_vectors(0, weight=zero_w)
    if not closed:
        return QuasiIsoVerdict(False, reason="no closed degree-0 weight-0 morphism")
    candidates = list(closed)
    for i in range(len(closed)):
        for j in range(i + 1, len(closed)):
            candidates.append([a + b for a, b in zip(closed[i], closed[j])])
    for vec in candidates:
        phi = TwMorphism(c0, c1, 0, hb.element(vec))
        if _induced_iso_everywhere(phi, c0, c1):
            return QuasiIsoVerdict(True, witness=phi)
    return QuasiIsoVerdict(False, reason="undetermined: no candidate witness worked")


# ---------------------------------------------------------------------
def tw_to_dict(c, base_ref="embedded"):
    return {
        "base": base_ref,
        "summands": [{"object": str(o), "shift": s, "twist": list(w)}
                     for o, s, w in c.summands],
        "delta": [{"row": r, "col": col,
                   "terms": [{"gen": n, "coeff": rat_str(v)}
                             for n, v in sorted(lc.items())]}
                  for (r, col), lc in sorted(c.delta.items())],
    }


def tw_from_dict(data, base):
    allowed = {"base", "summands", "delta"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown fields in tw file: {sorted(unknown)}")
    summands = [(s["object"], s["shift"], tuple(s["twist"]))
                for s in data["summands"]]
    delta = {}
    for entry in data["delta"]:
        lc = {t["gen"]: rat(t["coeff"]) for t in entry["terms"]}
        delta[(entry["row"], entry["col"])] = lc
    return TwObject(base, summands, delta)


def save_tw(c, path, base_ref="embedded"):
    with open(path, "w") as f:
        json.dump(tw_to_dict(c, base_ref), f, indent=1, sort_keys=True)
        f.write("\n")


def load_tw(path, base):
    with open(path) as f:
        return tw_from_dict(json.load(f), base)
