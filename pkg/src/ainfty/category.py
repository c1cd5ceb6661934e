"""Finite graded weighted categories and sparse A-infinity structures.

Conventions (fixed once, used everywhere):

* Input tuples in files, dict keys and public calls are in composition
  order a_1, ..., a_d (source to target).  The structure maps are the
  usual mu^d(a_d, ..., a_1) with decreasing numbering; the engine reverses
  internally.
* Degree law: deg mu^d(a_d,...,a_1) = sum deg(a_i) + 2 - d.  Weights are
  additive.
* Associativity sign: sum over e, i of
      (-1)^{|a_1|+...+|a_i| - i} mu(a_d,...,mu(a_{i+e},...,a_{i+1}),...,a_1)
  vanishes.
* Strict units: mu^2(a, e) = a, mu^2(e, a) = (-1)^{|a|} a, units kill all
  mu^d with d != 2.  Units are synthesized per object, never stored.
"""

import json
from fractions import Fraction

from .linalg import rat, rat_str

UNIT_PREFIX = "e:"


def unit_name(obj):
    return UNIT_PREFIX + str(obj)


def is_unit(name):
    return name.startswith(UNIT_PREFIX)


class Generator:
    __slots__ = ("name", "src", "dst", "degree", "weight")

    def __init__(self, name, src, dst, degree, weight):
        self.name = name
        self.src = src
        self.dst = dst
        self.degree = int(degree)
        self.weight = tuple(int(w) for w in weight)

    def __repr__(self):
        return f"Generator({self.name!r}, {self.src!r}->{self.dst!r}, deg {self.degree})"


class QuiverData:
    """Objects, weight lattice rank and the generator basis."""

    def __init__(self, objects, weight_rank, generators, directed=False,
                 strict_units=True):
        self.objects = list(objects)
        self.weight_rank = int(weight_rank)
        self.generators = {}
        self.directed = directed
        self.strict_units = strict_units
        obj_set = set(self.objects)
        for g in generators:
            if g.name in self.generators or is_unit(g.name):
                raise ValueError(f"duplicate or reserved generator name {g.name!r}")
            if g.src not in obj_set or g.dst not in obj_set:
                raise ValueError(f"generator {g.name!r} has unknown endpoint")
            if len(g.weight) != self.weight_rank:
                raise ValueError(f"generator {g.name!r} has weight of wrong rank")
            self.generators[g.name] = g
        self._by_pair = {}
        for g in self.generators.values():
            self._by_pair.setdefault((g.src, g.dst), []).append(g.name)

    def zero_weight(self):
        return (0,) * self.weight_rank

    def src(self, name):
        if is_unit(name):
            return name[len(UNIT_PREFIX):]
        return self.generators[name].src

    def dst(self, name):
        if is_unit(name):
            return name[len(UNIT_PREFIX):]
        return self.generators[name].dst

    def degree(self, name):
        if is_unit(name):
            return 0
        return self.generators[name].degree

    def weight(self, name):
        if is_unit(name):
            return self.zero_weight()
        return self.generators[name].weight

    def pair_basis(self, src, dst, with_units=False):
        """Generator names from src to dst, units included on demand."""
        names = list(self._by_pair.get((src, dst), ()))
        if with_units and src == dst and self.strict_units:
            names.append(unit_name(src))
        return names

    def composable(self, names):
        return all(self.dst(a) == self.src(b) for a, b in zip(names, names[1:]))


def lc_add(acc, other, scale=1):
    for k, v in other.items():
        nv = acc.get(k, Fraction(0)) + v * scale
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)
    return acc


def lc_scale(lc, s):
    if not s:
        return {}
    return {k: v * s for k, v in lc.items()}


class Report:
    """Pass/fail verdict with a list of failure witnesses."""

    def __init__(self, title):
        self.title = title
        self.failures = []

    @property
    def ok(self):
        return not self.failures

    def fail(self, witness):
        self.failures.append(witness)

    def to_dict(self):
        return {"title": self.title, "ok": self.ok,
                "failures": [str(f) for f in self.failures[:50]],
                "n_failures": len(self.failures)}

    def __repr__(self):
        state = "ok" if self.ok else f"{len(self.failures)} failures"
        return f"<Report {self.title}: {state}>"


class AInftyStructure:
    """Sparse mu-tensors on a generator basis.

    mu maps a tuple of generator names in composition order to a linear
    combination {output name: Fraction}.  Entries with zero value are
    dropped.  Units never appear in stored keys; their compositions are
    supplied by the strict-unit axioms.
    """

    def __init__(self, base, mu=None):
        self.base = base
        self.mu = {}
        if mu:
            for key, lc in mu.items():
                self.set_mu(key, lc)

    def set_mu(self, key, lc):
        key = tuple(key)
        if any(is_unit(n) for n in key):
            raise ValueError("unit compositions are implicit, not stored")
        lc = {k: Fraction(v) for k, v in lc.items() if Fraction(v)}
        if lc:
            self.mu[key] = lc
        else:
            self.mu.pop(key, None)

    def max_order(self):
        return max((len(k) for k in self.mu), default=1)

    def orders(self):
        return sorted({len(k) for k in self.mu})

    # -- evaluation -----------------------------------------------------
    def mu_names(self, names):
        """mu^d on a tuple of generator/unit names, composition order."""
        d = len(names)
        units = [n for n in names if is_unit(n)]
        if units:
            if d != 2:
                return {}
            a, b = names
            if is_unit(a) and is_unit(b):
                return {a: Fraction(1)} if a == b else {}
            if is_unit(a):  # mu2(b, e) = b
                return {b: Fraction(1)} if self.base.src(b) == a[len(UNIT_PREFIX):] else {}
            # mu2(e, a) = (-1)^{|a|} a
            if self.base.dst(a) != b[len(UNIT_PREFIX):]:
                return {}
            return {a: Fraction((-1) ** self.base.degree(a))}
        return self.mu.get(tuple(names), {})

    def mu_lincombs(self, lincombs):
        """Multilinear extension of mu_names to {name: coeff} inputs."""
        out = {}

        def rec(i, key, coeff):
            if not coeff:
                return
            if i == len(lincombs):
                lc_add(out, self.mu_names(key), coeff)
                return
            for n, c in lincombs[i].items():
                rec(i + 1, key + (n,), coeff * c)

        rec(0, (), Fraction(1))
        return out

    # -- chains ---------------------------------------------------------
    def composable_chains(self, length, with_units=False):
        outgoing = {}
        for g in self.base.generators.values():
            outgoing.setdefault(g.src, []).append(g.name)
        for names in outgoing.values():
            names.sort()
        if with_units and self.base.strict_units:
            for obj in self.base.objects:
                outgoing.setdefault(obj, []).insert(0, unit_name(obj))
        chains = []

        def extend(chain, obj):
            if len(chain) == length:
                chains.append(tuple(chain))
                return
            for n in outgoing.get(obj, ()):
                extend(chain + [n], self.base.dst(n))

        for obj in self.base.objects:
            extend([], obj)
        return chains

    def restrict(self, objects):
        """Full A-infinity subcategory on the given objects."""
        objs = set(objects)
        gens = [g for g in self.base.generators.values()
                if g.src in objs and g.dst in objs]
        base = QuiverData(list(objects), self.base.weight_rank, gens,
                          directed=self.base.directed,
                          strict_units=self.base.strict_units)
        keep = {g.name for g in gens}
        mu = {k: dict(v) for k, v in self.mu.items()
              if set(k) <= keep and set(v) <= keep}
        return AInftyStructure(base, mu)


# ---------------------------------------------------------------------
def check_homogeneity(a):
    """Degree and weight laws for every stored coefficient."""
    rep = Report("homogeneity")
    base = a.base
    for key, lc in sorted(a.mu.items()):
        d = len(key)
        if not base.composable(key):
            rep.fail(("not composable", key))
            continue
        deg_in = sum(base.degree(n) for n in key)
        w_in = tuple(sum(base.weight(n)[i] for n in key)
                     for i in range(base.weight_rank))
        for out in sorted(lc):
            if base.src(out) != base.src(key[0]) or base.dst(out) != base.dst(key[-1]):
                rep.fail(("endpoints", key, out))
            if base.degree(out) != deg_in + 2 - d:
                rep.fail(("degree", key, out))
            if base.weight(out) != w_in:
                rep.fail(("weight", key, out))
    return rep


def ainfty_defect(a, names):
    """The associativity sum on one composition-order chain of names."""
    d = len(names)
    acc = {}
    for e in range(1, d + 1):
        for i in range(0, d - e + 1):
            inner = a.mu_names(names[i:i + e])
            if not inner:
                continue
            sign = Fraction((-1) ** (sum(a.base.degree(n) for n in names[:i]) - i))
            for mid, c in inner.items():
                outer_key = names[:i] + (mid,) + names[i + e:]
                if len(outer_key) == 0:
                    continue
                outer = a.mu_names(outer_key)
                lc_add(acc, outer, sign * c)
    return acc


def check_ainfty(a, max_arity, with_units=False):
    """A-infinity associativity up to the given arity.

    Failure witnesses are (chain, defect) pairs; the report also carries
    the first counterexample for quick inspection.
    """
    if max_arity < 2:
        raise ValueError("max_arity must be >= 2")
    rep = Report(f"ainfty<= {max_arity}")
    for length in range(1, max_arity + 1):
        for chain in a.composable_chains(length, with_units=with_units):
            defect = ainfty_defect(a, chain)
            if defect:
                rep.fail((chain, {k: rat_str(v) for k, v in defect.items()}))
    return rep


# ---------------------------------------------------------------------
class GaugeTransformation:
    """Formal diffeomorphism with G^1 = id; components G^d have degree 1-d.

    comp maps composition-order input tuples to linear combinations, same
    sparse format as AInftyStructure.mu.
    """

    def __init__(self, base, comp=None):
        self.base = base
        self.comp = {}
        if comp:
            for key, lc in comp.items():
                key = tuple(key)
                if len(key) < 2:
                    raise ValueError("G^1 is the identity and not stored")
                lc = {k: Fraction(v) for k, v in lc.items() if Fraction(v)}
                if lc:
                    self.comp[key] = lc

    def apply_names(self, names):
        """G^d on a tuple of names (composition order); G^1 = id."""
        if len(names) == 1:
            return {names[0]: Fraction(1)}
        if any(is_unit(n) for n in names):
            return {}
        return self.comp.get(tuple(names), {})

    def check_homogeneity(self):
        """deg G^d = sum of input degrees + 1 - d; weights additive."""
        rep = Report("gauge homogeneity")
        base = self.base
        for key, lc in sorted(self.comp.items()):
            d = len(key)
            if not base.composable(key):
                rep.fail(("not composable", key))
                continue
            deg_in = sum(base.degree(n) for n in key)
            w_in = tuple(sum(base.weight(n)[i] for n in key)
                         for i in range(base.weight_rank))
            for out in sorted(lc):
                if base.degree(out) != deg_in + 1 - d:
                    rep.fail(("degree", key, out))
                if base.weight(out) != w_in:
                    rep.fail(("weight", key, out))
        return rep


def _compositions(d):
    """All tuples (s_1..s_r) of positive integers summing to d."""
    if d == 0:
        yield ()
        return
    for first in range(1, d + 1):
        for rest in _compositions(d - first):
            yield (first,) + rest


def apply_gauge(a, g, max_order):
    """Push an A-infinity structure forward along a gauge transformation.

    Solves the A-infinity functor equation for the target structure order
    by order; output is truncated at max_order.
    """
    if g.base is not a.base and g.base.generators.keys() != a.base.generators.keys():
        raise ValueError("gauge transformation lives on a different quiver")
    out = AInftyStructure(a.base)
    for d in range(1, max_order + 1):
        for chain in a.composable_chains(d):
            # right side: G applied after inserting one mu of the source
            rhs = {}
            for e in range(1, d + 1):
                for i in range(0, d - e + 1):
                    inner = a.mu_names(chain[i:i + e])
                    if not inner:
                        continue
                    sign = Fraction(
                        (-1) ** (sum(a.base.degree(n) for n in chain[:i]) - i))
                    for mid, c in inner.items():
                        key = chain[:i] + (mid,) + chain[i + e:]
                        lc_add(rhs, g.apply_names(key), sign * c)
            # left side: all splittings except the trivial one
            for split in _compositions(d):
                if len(split) == d:
                    continue  # all-ones: the unknown mu'^d itself
                pieces = []
                pos = 0
                for s in split:
                    pieces.append(chain[pos:pos + s])
                    pos += s
                glcs = [g.apply_names(p) for p in pieces]
                if any(not lc for lc in glcs):
                    continue
                term = {}

                def rec(idx, key, coeff):
                    if idx == len(glcs):
                        lc_add(term, out.mu_names(key), coeff)
                        return
                    for n, c in glcs[idx].items():
                        rec(idx + 1, key + (n,), coeff * c)

                rec(0, (), Fraction(1))
                lc_add(rhs, term, Fraction(-1))
            if rhs:
                out.set_mu(chain, rhs)
    return out


def compose_gauges(g2, g1):
    """The gauge transformation g2 after g1 (components composed)."""
    base = g1.base
    comp = {}
    max_d = max([len(k) for k in g1.comp] + [len(k) for k in g2.comp] + [1])
    probe = AInftyStructure(base)
    for d in range(2, max_d + 1):
        for chain in probe.composable_chains(d):
            acc = {}
            for split in _compositions(d):
                pieces = []
                pos = 0
                for s in split:
                    pieces.append(chain[pos:pos + s])
                    pos += s
                g1lcs = [g1.apply_names(p) for p in pieces]
                if any(not lc for lc in g1lcs):
                    continue

                def rec(idx, key, coeff):
                    if idx == len(g1lcs):
                        lc_add(acc, g2.apply_names(key), coeff)
                        return
                    for n, c in g1lcs[idx].items():
                        rec(idx + 1, key + (n,), coeff * c)

                rec(0, (), Fraction(1))
            if acc:
                comp[chain] = acc
    return GaugeTransformation(base, comp)


def inverse_gauge(g, max_order):
    """Inverse of a gauge transformation up to the given order."""
    inv = GaugeTransformation(g.base)
    probe = AInftyStructure(g.base)
    for d in range(2, max_order + 1):
        for chain in probe.composable_chains(d):
            # (g o inv)^d = sum over splittings of g after inv pieces = 0
            acc = {}
            for split in _compositions(d):
                pieces = []
                pos = 0
                for s in split:
                    pieces.append(chain[pos:pos + s])
                    pos += s
                ilcs = [inv.apply_names(p) if len(p) < d else None for p in pieces]
                if len(split) == 1:
                    # g^1(inv^d) = inv^d: the unknown; skip, solve for it
                    continue
                if any(lc is not None and not lc for lc in ilcs):
                    continue

                def rec(idx, key, coeff):
                    if idx == len(pieces):
                        lc_add(acc, g.apply_names(key), coeff)
                        return
                    for n, c in ilcs[idx].items():
                        rec(idx + 1, key + (n,), coeff * c)

                rec(0, (), Fraction(1))
            if acc:
                inv.comp[chain] = {k: -v for k, v in acc.items()}
    return inv


# ---------------------------------------------------------------------
class GroupAction:
    """Diagonal action of a finite abelian group, by generator characters.

    moduli: cyclic factor orders (n_1, ..., n_r); characters: generator
    name -> tuple of residues, one per factor.  Objects are fixed.
    """

    def __init__(self, moduli, characters):
        self.moduli = tuple(int(n) for n in moduli)
        if any(n < 1 for n in self.moduli):
            raise ValueError("cyclic factor orders must be positive")
        self.characters = {
            g: tuple(int(c) % n for c, n in zip(ch, self.moduli))
            for g, ch in characters.items()}

    def order(self):
        n = 1
        for m in self.moduli:
            n *= m
        return n

    def elements(self):
        elems = [()]
        for n in self.moduli:
            elems = [e + (i,) for e in elems for i in range(n)]
        return elems

    def char(self, name):
        if is_unit(name):
            return tuple(0 for _ in self.moduli)
        return self.characters[name]

    def add(self, c1, c2):
        return tuple((a + b) % n for a, b, n in zip(c1, c2, self.moduli))


def check_action(a, action):
    """Does the action preserve every stored coefficient's character?"""
    rep = Report("group action preserves mu")
    for key, lc in sorted(a.mu.items()):
        cin = tuple(0 for _ in action.moduli)
        for n in key:
            cin = action.add(cin, action.char(n))
        for out in sorted(lc):
            if action.char(out) != cin:
                rep.fail((key, out))
    for g in a.base.generators:
        if g not in action.characters:
            rep.fail(("missing character", g))
    return rep


def semidirect_product(a, action):
    """Semidirect product by a finite abelian diagonal action.

    Objects of the result are (object, character) pairs; in the
    character-idempotent basis the structure constants equal those of the
    input, filtered by character matching, so everything stays rational.
    """
    rep = check_action(a, action)
    if not rep.ok:
        raise ValueError(f"action does not preserve mu: {rep.failures[:3]}")
    elems = action.elements()
    base = a.base

    def oname(obj, chi):
        return f"{obj}|{','.join(map(str, chi))}"

    def gname(g, chi):
        return f"{g}@{','.join(map(str, chi))}"

    objects = [oname(o, chi) for o in base.objects for chi in elems]
    gens = []
    for g in base.generators.values():
        for chi in elems:
            tgt = action.add(chi, action.char(g.name))
            gens.append(Generator(gname(g.name, chi), oname(g.src, chi),
                                  oname(g.dst, tgt), g.degree, g.weight))
    newbase = QuiverData(objects, base.weight_rank, gens,
                         directed=False, strict_units=base.strict_units)
    out = AInftyStructure(newbase)
    for key, lc in a.mu.items():
        for chi in elems:
            cur = chi
            new_key = []
            for n in key:
                new_key.append(gname(n, cur))
                cur = action.add(cur, action.char(n))
            new_lc = {gname(o, chi): v for o, v in lc.items()}
            out.set_mu(tuple(new_key), new_lc)
    return out


# ---------------------------------------------------------------------
# category file format
def to_dict(a):
    base = a.base
    return {
        "field": "Q",
        "weight_rank": base.weight_rank,
        "objects": [str(o) for o in base.objects],
        "generators": [
            {"name": g.name, "src": g.src, "dst": g.dst,
             "degree": g.degree, "weight": list(g.weight)}
            for g in base.generators.values()],
        "mu": [
            {"order": len(key), "inputs": list(key), "output": out,
             "coeff": rat_str(c)}
            for key in sorted(a.mu, key=lambda k: (len(k), k))
            for out, c in sorted(a.mu[key].items())],
        "flags": {"directed": base.directed,
                  "strict_units": base.strict_units},
    }


def from_dict(data):
    allowed = {"field", "weight_rank", "objects", "generators", "mu", "flags"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown fields in category file: {sorted(unknown)}")
    if data.get("field", "Q") != "Q":
        raise ValueError("only field Q is supported")
    flags = data.get("flags", {})
    unknown = set(flags) - {"directed", "strict_units"}
    if unknown:
        raise ValueError(f"unknown flags: {sorted(unknown)}")
    gens = []
    for g in data["generators"]:
        extra = set(g) - {"name", "src", "dst", "degree", "weight"}
        if extra:
            raise ValueError(f"unknown generator fields: {sorted(extra)}")
        gens.append(Generator(g["name"], g["src"], g["dst"], g["degree"],
                              g["weight"]))
    base = QuiverData(data["objects"], data["weight_rank"], gens,
                      directed=bool(flags.get("directed", False)),
                      strict_units=bool(flags.get("strict_units", True)))
    a = AInftyStructure(base)
    acc = {}
    for entry in data["mu"]:
        extra = set(entry) - {"order", "inputs", "output", "coeff"}
        if extra:
            raise ValueError(f"unknown mu entry fields: {sorted(extra)}")
        key = tuple(entry["inputs"])
        if len(key) != entry["order"]:
            raise ValueError(f"order does not match inputs for {key}")
        acc.setdefault(key, {})
        out = entry["output"]
        acc[key][out] = acc[key].get(out, Fraction(0)) + rat(entry["coeff"])
    for key, lc in acc.items():
        a.set_mu(key, lc)
    return a


def save_category(a, path):
    with open(path, "w") as f:
        json.dump(to_dict(a), f, indent=1, sort_keys=True)
        f.write("\n")


def load_category(path):
    with open(path) as f:
        return from_dict(json.load(f))
