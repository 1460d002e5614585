"""Canonical JSON forms for every object the service accepts or emits.

All dumps are deterministic: keys sorted, lists in canonical order, no
floats, stable separators.  Loaders re-derive redundant structure
(inverses, identities) and validate.
"""

from __future__ import annotations

import json

from . import intlin as il
from .coeffs import GGroup, GModule
from .crs import Boundary3, BoundaryN, CrossedComplex
from .fgab import FgAbelian
from .groups import FiniteGroup
from .groupoid import FiniteGroupoid, GroupoidFunctor
from .xmod import CrossedModule, PreCrossedModule


class ParseError(Exception):
    pass


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"bad JSON at line {e.lineno}: {e.msg}") from e


# -- groupoids ---------------------------------------------------------------


def dump_groupoid(g: FiniteGroupoid):
    return {
        "objects": list(g.objects),
        "arrows": [{"name": f, "src": s, "tgt": t}
                   for f, (s, t) in sorted(g.arrows.items())],
        "comp": [[a, b, c] for (a, b), c in sorted(g.comp.items())],
        "id": {x: g.id_map[x] for x in g.objects},
    }


def load_groupoid(d) -> FiniteGroupoid:
    try:
        objects = d["objects"]
        arrows = {a["name"]: (a["src"], a["tgt"]) for a in d["arrows"]}
        comp = {(a, b): c for a, b, c in d["comp"]}
        ids = dict(d["id"])
    except (KeyError, TypeError) as e:
        raise ParseError(f"groupoid payload malformed: {e}") from e
    g = FiniteGroupoid(objects, arrows, ids, comp, check=False)
    ok, msgs = g.validate()
    if not ok:
        raise ValueError("groupoid axioms fail: " + "; ".join(msgs[:3]))
    return g


def dump_functor(f: GroupoidFunctor):
    return {"objects": dict(sorted(f.obj_map.items())),
            "arrows": dict(sorted(f.arr_map.items()))}


# -- coefficients ------------------------------------------------------------


def dump_ggroup(c: GGroup):
    values = {}
    index = {}
    for x in c.base.objects:
        grp = c.value(x)
        elems = list(grp.elements)
        index[x] = {e: i for i, e in enumerate(elems)}
        values[x] = {
            "elements": elems,
            "table": [[index[x][grp.mul(a, b)] for b in elems] for a in elems],
        }
    actions = {}
    for t, (x, y) in sorted(c.base.arrows.items()):
        actions[t] = [index[y][c.act(t, a)] for a in c.value(x).elements]
    return {"values": values, "actions": actions}


def load_ggroup(base: FiniteGroupoid, d) -> GGroup:
    try:
        values = {}
        for x, v in d["values"].items():
            elems = v["elements"]
            mult = {(a, b): elems[v["table"][i][j]]
                    for i, a in enumerate(elems) for j, b in enumerate(elems)}
            values[x] = FiniteGroup(elems, mult, check=False)
        actions = {}
        for t, perm in d["actions"].items():
            x, y = base.arrows[t]
            src = values[x].elements
            dst = values[y].elements
            actions[t] = {src[i]: dst[p] for i, p in enumerate(perm)}
    except (KeyError, TypeError, IndexError) as e:
        raise ParseError(f"ggroup payload malformed: {e}") from e
    return GGroup(base, values, actions)


def dump_gmodule(a: GModule):
    return {
        "values": {x: {"rank": a.value(x).rank,
                       "relations": il.tolists(a.value(x).relations)}
                   for x in a.base.objects},
        "actions": {t: il.tolists(a.actions[t])
                    for t in sorted(a.base.arrows)},
    }


def load_gmodule(base: FiniteGroupoid, d) -> GModule:
    try:
        values = {x: FgAbelian(v["rank"],
                               il.mat(v["relations"], shape=(v["rank"], 0)))
                  for x, v in d["values"].items()}
        actions = {}
        for t, rows in d["actions"].items():
            x, y = base.arrows[t]
            actions[t] = il.mat(rows, shape=(values[y].rank, values[x].rank))
    except (KeyError, TypeError) as e:
        raise ParseError(f"gmodule payload malformed: {e}") from e
    return GModule(base, values, actions)


# -- crossed modules and complexes --------------------------------------------


def dump_xmod(m: PreCrossedModule):
    return {
        "base": dump_groupoid(m.base),
        "C": dump_ggroup(m.c),
        "delta": {x: dict(sorted(m.delta[x].items()))
                  for x in m.base.objects},
    }


def load_xmod(d, crossed=True):
    base = load_groupoid(d["base"])
    c = load_ggroup(base, d["C"])
    try:
        delta = {x: dict(v) for x, v in d["delta"].items()}
    except (KeyError, TypeError) as e:
        raise ParseError(f"crossed module payload malformed: {e}") from e
    cls = CrossedModule if crossed else PreCrossedModule
    return cls(base, c, delta)


def dump_crs(c: CrossedComplex):
    out = {"base": dump_groupoid(c.base), "rank": c.rank}
    if c.rank >= 2:
        out["dim2"] = {"C": dump_ggroup(c.dim2.c),
                       "delta": {x: dict(sorted(c.dim2.delta[x].items()))
                                 for x in c.base.objects}}
    higher = []
    for n in sorted(c.higher):
        mod, bd = c.higher[n]
        entry = {"n": n, "module": dump_gmodule(mod)}
        if n == 3:
            entry["boundary"] = {x: list(bd.images[x]) for x in c.base.objects}
        else:
            entry["boundary"] = {x: il.tolists(bd.matrices[x])
                                 for x in c.base.objects}
        higher.append(entry)
    out["higher"] = higher
    return out


def load_crs(d) -> CrossedComplex:
    base = load_groupoid(d["base"])
    rank = int(d.get("rank", 1))
    dim2 = None
    if "dim2" in d and d["dim2"] is not None:
        c = load_ggroup(base, d["dim2"]["C"])
        delta = {x: dict(v) for x, v in d["dim2"]["delta"].items()}
        dim2 = CrossedModule(base, c, delta)
    higher = {}
    for entry in sorted(d.get("higher", []), key=lambda e: int(e["n"])):
        n = int(entry["n"])
        mod = load_gmodule(base, entry["module"])
        if n == 3:
            bd = Boundary3({x: list(v) for x, v in entry["boundary"].items()})
        else:
            prev_rank = {x: (higher[n - 1][0].value(x).rank if n - 1 in higher
                             else 0) for x in base.objects}
            bd = BoundaryN({x: il.mat(v, shape=(prev_rank[x],
                                                mod.value(x).rank))
                            for x, v in entry["boundary"].items()})
        higher[n] = (mod, bd)
    crs = CrossedComplex(base, dim2, higher, rank, check=False)
    ok, msgs = crs.validate()
    if not ok:
        raise ValueError("crossed complex invalid: " + "; ".join(msgs[:3]))
    return crs


def validate_crs_payload(d):
    """Load without raising on semantic violations; returns (ok, report)."""
    base = load_groupoid(d["base"])
    rank = int(d.get("rank", 1))
    dim2 = None
    if "dim2" in d and d["dim2"] is not None:
        c = load_ggroup(base, d["dim2"]["C"])
        delta = {x: dict(v) for x, v in d["dim2"]["delta"].items()}
        dim2 = PreCrossedModule(base, c, delta, check=False)
        ok0, msgs0 = dim2.validate()
        if not ok0:
            return False, msgs0
        dim2 = CrossedModule(base, c, delta, check=False)
    higher = {}
    for entry in sorted(d.get("higher", []), key=lambda e: int(e["n"])):
        n = int(entry["n"])
        mod = load_gmodule(base, entry["module"])
        if n == 3:
            bd = Boundary3({x: list(v) for x, v in entry["boundary"].items()})
        else:
            prev_rank = {x: (higher[n - 1][0].value(x).rank if n - 1 in higher
                             else 0) for x in base.objects}
            bd = BoundaryN({x: il.mat(v, shape=(prev_rank[x],
                                                mod.value(x).rank))
                            for x, v in entry["boundary"].items()})
        higher[n] = (mod, bd)
    crs = CrossedComplex(base, dim2, higher, rank, check=False)
    return crs.validate()


# -- extensions ----------------------------------------------------------------


def dump_extension(ext):
    from .ext import TwoExtension
    p = ext.p
    out = {"stage": ext.stage}
    if ext.stage == 1:
        out["pi"] = dump_groupoid(p["pi"])
        out["fiber"] = dump_xmod(p["fiber_xm"])
        out["q"] = dump_functor(p["q"])
        out["A"] = dump_gmodule(p["a_mod"])
        out["ker_iso"] = {
            x: {u: list(p["bridges"][x][0](u))
                for u in p["fiber_xm"].kernel_elements(x)}
            for x in p["fiber_xm"].base.objects}
        return out
    out["pi"] = dump_groupoid(p["pi"])
    out["q"] = dump_functor(p["q"])
    out["A"] = dump_gmodule(p["a_mod"])
    out["E1"] = dump_gmodule(p["e1"])
    out["incl"] = {x: il.tolists(p["incl"][x]) for x in sorted(p["incl"])}
    if ext.stage == 2:
        out["target"] = dump_xmod(p["target_xm"])
        out["E0"] = dump_ggroup(p["e0"])
        out["sigma"] = {x: list(v) for x, v in p["sigma"].images.items()}
        out["tau"] = {x: dict(sorted(p["tau"][x].items()))
                      for x in sorted(p["tau"])}
        out["E0_delta"] = {x: dict(sorted(p["e0_delta"][x].items()))
                           for x in sorted(p["e0_delta"])}
    else:
        out["target"] = dump_crs(p["target"])
        out["E0"] = dump_gmodule(p["e0"])
        out["sigma"] = {x: il.tolists(p["sigma"].matrices[x])
                        for x in sorted(p["sigma"].matrices)}
        out["tau"] = {x: il.tolists(p["tau"][x]) for x in sorted(p["tau"])}
    return out


def load_extension(d):
    from .ext import TwoExtension
    stage = int(d["stage"])
    pi = load_groupoid(d["pi"])
    a_mod = load_gmodule(pi, d["A"])
    if stage == 1:
        fiber = load_xmod(d["fiber"])
        q = GroupoidFunctor(fiber.base, pi, d["q"]["objects"],
                            d["q"]["arrows"])
        iso = {x: {u: tuple(v) for u, v in per.items()}
               for x, per in d["ker_iso"].items()}
        bridges = {}
        for x in fiber.base.objects:
            fwd = iso.get(x, {})
            back = {tuple(v): u for u, v in fwd.items()}
            bridges[x] = (lambda u, f=fwd: f[u],
                          lambda vec, b=back, a=a_mod, q=q, x=x:
                          b[tuple(a.value(q.obj_map[x]).normal_form(vec))])
        return TwoExtension(1, {"pi": pi, "q": q, "fiber_xm": fiber,
                                "a_mod": a_mod, "bridges": bridges})
    if stage == 2:
        target = load_xmod(d["target"])
        base = target.base
        q = GroupoidFunctor(base, pi, d["q"]["objects"], d["q"]["arrows"])
        e0 = load_ggroup(base, d["E0"])
        e1 = load_gmodule(base, d["E1"])
        sigma = Boundary3({x: list(v) for x, v in d["sigma"].items()})
        tau = {x: dict(v) for x, v in d["tau"].items()}
        incl = {x: il.mat(v, shape=(e1.value(x).rank,
                                    a_mod.value(q.obj_map[x]).rank))
                for x, v in d["incl"].items()}
        return TwoExtension(2, {
            "pi": pi, "q": q, "target_xm": target, "a_mod": a_mod,
            "e1": e1, "e0": e0,
            "e0_delta": {x: dict(v) for x, v in d["E0_delta"].items()},
            "sigma": sigma, "tau": tau, "incl": incl})
    target = load_crs(d["target"])
    base = target.base
    q = GroupoidFunctor(base, pi, d["q"]["objects"], d["q"]["arrows"])
    e0 = load_gmodule(base, d["E0"])
    e1 = load_gmodule(base, d["E1"])
    sigma = BoundaryN({x: il.mat(v, shape=(e0.value(x).rank,
                                           e1.value(x).rank))
                       for x, v in d["sigma"].items()})
    tau = {x: il.mat(v, shape=(target.module(stage).value(x).rank,
                               e0.value(x).rank))
           for x, v in d["tau"].items()}
    incl = {x: il.mat(v, shape=(e1.value(x).rank,
                                a_mod.value(q.obj_map[x]).rank))
            for x, v in d["incl"].items()}
    return TwoExtension(stage, {
        "pi": pi, "q": q, "target": target, "a_mod": a_mod,
        "e1": e1, "e0": e0, "sigma": sigma, "tau": tau, "incl": incl})


# -- simplicial objects ---------------------------------------------------------


def dump_simplicial_groupoid(sg):
    return {
        "kind": "sgpd",
        "levels": [dump_groupoid(l) for l in sg.levels],
        "faces": {f"{i},{k}": dict(sorted(v.items()))
                  for (i, k), v in sg.faces.items()},
        "degens": {f"{i},{k}": dict(sorted(v.items()))
                   for (i, k), v in sg.degens.items()},
    }


def load_simplicial_groupoid(d):
    from .simplicial import TruncSimplicialGroupoid
    levels = [load_groupoid(l) for l in d["levels"]]
    faces = {tuple(map(int, k.split(","))): dict(v)
             for k, v in d["faces"].items()}
    degens = {tuple(map(int, k.split(","))): dict(v)
              for k, v in d["degens"].items()}
    return TruncSimplicialGroupoid(levels, faces, degens)


def dump_simplicial_xmod(sx):
    return {
        "kind": "sxmod",
        "base": dump_groupoid(sx.base),
        "levels": [{"C": dump_ggroup(l.c),
                    "delta": {x: dict(sorted(l.delta[x].items()))
                              for x in sx.base.objects}} for l in sx.levels],
        "faces": {f"{i},{k}": {x: dict(sorted(m.items()))
                               for x, m in v.items()}
                  for (i, k), v in sx.faces.items()},
        "degens": {f"{i},{k}": {x: dict(sorted(m.items()))
                                for x, m in v.items()}
                   for (i, k), v in sx.degens.items()},
    }


def load_simplicial_xmod(d):
    from .simplicial import TruncSimplicialXMod
    base = load_groupoid(d["base"])
    levels = []
    for entry in d["levels"]:
        c = load_ggroup(base, entry["C"])
        levels.append(CrossedModule(base, c,
                                    {x: dict(v)
                                     for x, v in entry["delta"].items()}))
    faces = {tuple(map(int, k.split(","))): {x: dict(m) for x, m in v.items()}
             for k, v in d["faces"].items()}
    degens = {tuple(map(int, k.split(","))): {x: dict(m) for x, m in v.items()}
              for k, v in d["degens"].items()}
    return TruncSimplicialXMod(base, levels, faces, degens)


def dump_simplicial_module(sm):
    return {
        "levels": [dump_gmodule(l) for l in sm.levels],
        "faces": {f"{i},{k}": {x: il.tolists(m) for x, m in v.items()}
                  for (i, k), v in sm.faces.items()},
        "degens": {f"{i},{k}": {x: il.tolists(m) for x, m in v.items()}
                   for (i, k), v in sm.degens.items()},
    }


def load_simplicial_module(base, d):
    from .dold_kan import SimplicialModule
    levels = [load_gmodule(base, l) for l in d["levels"]]
    faces = {}
    for k, v in d["faces"].items():
        i, kk = map(int, k.split(","))
        faces[(i, kk)] = {x: il.mat(m, shape=(levels[i - 1].value(x).rank,
                                              levels[i].value(x).rank))
                          for x, m in v.items()}
    degens = {}
    for k, v in d["degens"].items():
        i, kk = map(int, k.split(","))
        degens[(i, kk)] = {x: il.mat(m, shape=(levels[i + 1].value(x).rank,
                                               levels[i].value(x).rank))
                           for x, m in v.items()}
    return SimplicialModule(base, levels, faces, degens)


def dump_simplicial_ncrs(sx):
    out = {
        "kind": "sncrs",
        "n": sx.n,
        "tail": dump_crs(sx.tail),
        "head": dump_simplicial_module(sx.head),
    }
    if sx.n == 3:
        out["aug"] = {x: list(v) for x, v in sx.aug.images.items()}
    else:
        out["aug"] = {x: il.tolists(m) for x, m in sx.aug.items()}
    return out


def load_simplicial_ncrs(d):
    from .simplicial import TruncSimplicialNCrs
    tail = load_crs(d["tail"])
    head = load_simplicial_module(tail.base, d["head"])
    n = int(d["n"])
    if n == 3:
        aug = Boundary3({x: list(v) for x, v in d["aug"].items()})
    else:
        prev = tail.module(n - 1)
        aug = {x: il.mat(v, shape=(prev.value(x).rank,
                                   head.level(0).value(x).rank))
               for x, v in d["aug"].items()}
    return TruncSimplicialNCrs(n, tail, head, aug)


def dump_simplicial_set(ss):
    return {
        "kind": "sset",
        "levels": [[list(s) if isinstance(s, tuple) else s for s in lvl]
                   for lvl in ss.levels],
        "faces": {f"{i},{k}": [[list(a) if isinstance(a, tuple) else a,
                                list(b) if isinstance(b, tuple) else b]
                               for a, b in sorted(v.items())]
                  for (i, k), v in ss.faces.items()},
        "degens": {f"{i},{k}": [[list(a) if isinstance(a, tuple) else a,
                                 list(b) if isinstance(b, tuple) else b]
                                for a, b in sorted(v.items())]
                   for (i, k), v in ss.degens.items()},
    }


def _freeze(v):
    return tuple(v) if isinstance(v, list) else v


def load_simplicial_set(d):
    from .simplicial import TruncSimplicialSet
    levels = [[_freeze(s) for s in lvl] for lvl in d["levels"]]
    faces = {tuple(map(int, k.split(","))):
             {_freeze(a): _freeze(b) for a, b in v}
             for k, v in d["faces"].items()}
    degens = {tuple(map(int, k.split(","))):
              {_freeze(a): _freeze(b) for a, b in v}
              for k, v in d["degens"].items()}
    return TruncSimplicialSet(levels, faces, degens)


def dump_sxmod_linear(obj):
    return {"kind": "sxmod_linear",
            "base": dump_groupoid(obj.pi),
            "module": dump_simplicial_module(obj.module)}


def load_sxmod_linear(d):
    from .simplicial import LinearSimplicialXMod
    base = load_groupoid(d["base"])
    module = load_simplicial_module(base, d["module"])
    return LinearSimplicialXMod(base, module)
