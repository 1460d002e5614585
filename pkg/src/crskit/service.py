"""HTTP service exposing the kernel: validation, towers, torsors, the ladder.

Every endpoint is a pure request/response computation over JSON payloads;
the CLI is a thin client of this app.  Errors carry a kind so clients can
map them to distinct exit codes: parse, validation, range, size.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI
from pydantic import BaseModel

from . import serialize as sz
from .crs import Tower
from .ext import (extension_from_tower, is_u_split, torsor_from_extension,
                  validate_extension, validate_torsor)
from .groups import SizeCapError
from .serialize import ParseError
from .simplicial import check_em_ladder, wbar1, wbar2, wbarn, wbar1_em_vs_l

app = FastAPI(title="crskit", version="0.1.0")


class ObjectRequest(BaseModel):
    kind: str
    payload: dict


class ComplexRequest(BaseModel):
    complex: dict
    stage: Optional[int] = None
    object: Optional[str] = None


class EmCheckRequest(BaseModel):
    n: int
    m: int
    pi: dict
    coefficients: dict
    against_l: bool = False


class ServiceResponse(BaseModel):
    ok: bool
    error: Optional[dict] = None
    result: Optional[dict] = None


def _run(fn):
    try:
        return ServiceResponse(ok=True, result=fn())
    except ParseError as e:
        return ServiceResponse(ok=False, error={"kind": "parse",
                                                "message": str(e)})
    except (KeyError, TypeError) as e:
        return ServiceResponse(ok=False, error={"kind": "parse",
                                                "message": f"missing field: {e}"})
    except SizeCapError as e:
        return ServiceResponse(ok=False, error={"kind": "size",
                                                "message": str(e)})
    except ValueError as e:
        return ServiceResponse(ok=False, error={"kind": "validation",
                                                "message": str(e)})


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.post("/validate", response_model=ServiceResponse)
def validate(req: ObjectRequest):
    def go():
        if req.kind == "groupoid":
            g = sz.load_groupoid(req.payload)  # raises on axiom failure
            ok, msgs = g.validate()
        elif req.kind == "xmod":
            m = sz.load_xmod(req.payload)
            ok, msgs = m.validate()
            if ok and not m.is_crossed():
                ok = False
                msgs = [f"Peiffer identity fails at {v}"
                        for v in m.peiffer_violations()[:3]]
        elif req.kind == "crs":
            ok, msgs = sz.validate_crs_payload(req.payload)
        elif req.kind == "sgpd":
            ok, msgs = sz.load_simplicial_groupoid(req.payload).validate()
        elif req.kind == "sxmod":
            ok, msgs = sz.load_simplicial_xmod(req.payload).validate()
        elif req.kind == "sncrs":
            ok, msgs = sz.load_simplicial_ncrs(req.payload).validate()
        elif req.kind == "sset":
            ok, msgs = sz.load_simplicial_set(req.payload).validate()
        else:
            raise ParseError(f"unknown kind {req.kind}")
        return {"valid": bool(ok), "violations": sorted(msgs)[:20]}
    return _validate_wrapper(go, req.kind)


def _validate_wrapper(go, kind):
    # construction errors on semantically invalid objects count as reports
    try:
        return ServiceResponse(ok=True, result=go())
    except ParseError as e:
        return ServiceResponse(ok=False, error={"kind": "parse",
                                                "message": str(e)})
    except (KeyError, TypeError) as e:
        return ServiceResponse(ok=False, error={"kind": "parse",
                                                "message": f"missing field: {e}"})
    except SizeCapError as e:
        return ServiceResponse(ok=False, error={"kind": "size",
                                                "message": str(e)})
    except ValueError as e:
        return ServiceResponse(ok=True,
                               result={"valid": False,
                                       "violations": [str(e)]})


@app.post("/pi", response_model=ServiceResponse)
def pi(req: ComplexRequest):
    def go():
        crs = sz.load_crs(req.complex)
        n = req.stage if req.stage is not None else 1
        if n < 0 or n > crs.rank + 1:
            raise ValueError(f"degree {n} out of range 0..{crs.rank + 1}")
        if n == 0:
            blocks, _ = crs.homotopy_group(0)
            return {"degree": 0, "kind": "components",
                    "components": {k: v for k, v in blocks.items()}}
        if n == 1:
            p1, _ = crs.homotopy_group(1)
            ends = {x: len(p1.end_group(x)) for x in p1.objects}
            abelian = all(p1.end_group(x).is_abelian() for x in p1.objects)
            return {"degree": 1, "kind": "groupoid",
                    "groupoid": sz.dump_groupoid(p1),
                    "end_orders": ends, "abelian": abelian}
        h = crs.homotopy_group(n)
        return {"degree": n, "kind": "module",
                "presentation": {x: h.invariant_string(x)
                                 for x in crs.base.objects}}
    return _run(go)


@app.post("/tower", response_model=ServiceResponse)
def tower(req: ComplexRequest):
    def go():
        crs = sz.load_crs(req.complex)
        tw = Tower(crs)
        stages = [sz.dump_crs(tw.stages[k]) for k in sorted(tw.stages)]
        fibs = {str(k): bool(tw.maps[k].is_fibration())
                for k in sorted(tw.maps)}
        limit_ok = tw.limit_reconstruction().levels_equal(crs)
        return {"stages": stages, "eta_is_fibration": fibs,
                "limit_reconstruction_equals_input": bool(limit_ok)}
    return _run(go)


@app.post("/fiber", response_model=ServiceResponse)
def fiber(req: ComplexRequest):
    def go():
        crs = sz.load_crs(req.complex)
        if req.stage is None or req.object is None:
            raise ValueError("fiber needs a stage and an object")
        if req.stage < 1 or req.stage > crs.rank + 1:
            raise ValueError(f"stage {req.stage} out of range")
        rep = crs.fiber(req.stage, req.object)
        homotopy = {}
        for k, v in rep.homotopy.items():
            if hasattr(v, "elements"):
                homotopy[str(k)] = f"group of order {len(v)}"
            else:
                homotopy[str(k)] = str(v)
        return {"stage": req.stage, "object": req.object,
                "homotopy": homotopy}
    return _run(go)


@app.post("/extension", response_model=ServiceResponse)
def extension(req: ComplexRequest):
    def go():
        crs = sz.load_crs(req.complex)
        n = req.stage if req.stage is not None else 1
        if n < 1 or n > crs.rank:
            raise ValueError(f"stage {n} out of range 1..{crs.rank}")
        ext = extension_from_tower(crs, n)
        ok, report = validate_extension(ext)
        return {"extension": sz.dump_extension(ext), "valid": bool(ok),
                "report": {k: v for k, v in sorted(report.items())
                           if isinstance(v, (bool, str, int))}}
    return _run(go)


@app.post("/torsor", response_model=ServiceResponse)
def torsor(req: ComplexRequest):
    def go():
        crs = sz.load_crs(req.complex)
        n = req.stage if req.stage is not None else 1
        if n < 1 or n > crs.rank:
            raise ValueError(f"stage {n} out of range 1..{crs.rank}")
        ext = extension_from_tower(crs, n)
        ok_e, rep_e = validate_extension(ext)
        t = torsor_from_extension(ext)
        ok_t, rep_t = validate_torsor(t)
        return {
            "stage": n,
            "extension_valid": bool(ok_e),
            "torsor_valid": bool(ok_t),
            "axioms": {k: bool(v) for k, v in sorted(rep_t.items())
                       if isinstance(v, bool)},
            "u_split": bool(is_u_split(t)),
            "coefficients": t.coeff.describe(),
            "extension": sz.dump_extension(ext),
        }
    return _run(go)


@app.post("/em-check", response_model=ServiceResponse)
def em_check(req: EmCheckRequest):
    def go():
        pi_g = sz.load_groupoid(req.pi)
        a_mod = sz.load_gmodule(pi_g, req.coefficients)
        if req.m < 1:
            raise ValueError("m must be >= 1")
        if req.against_l or req.n == 1:
            ok, report = wbar1_em_vs_l(pi_g, a_mod, req.m)
        else:
            ok, report = check_em_ladder(req.n, pi_g, a_mod, req.m)
        return {"passed": bool(ok), "report": _plain(report)}
    return _run(go)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in sorted(v.items(), key=lambda kv: str(kv[0]))}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, (int, str)):
        return v
    return str(v)


@app.post("/wbar", response_model=ServiceResponse)
def wbar(req: ObjectRequest):
    def go():
        if req.kind == "sgpd":
            sg = sz.load_simplicial_groupoid(req.payload)
            out = wbar1(sg)
            ok, msgs = out.validate()
            return {"output": sz.dump_simplicial_set(out),
                    "identities_verified": bool(ok)}
        if req.kind == "sxmod":
            sx = sz.load_simplicial_xmod(req.payload)
            out = wbar2(sx)
            ok, msgs = out.validate()
            return {"output": sz.dump_simplicial_groupoid(out),
                    "identities_verified": bool(ok)}
        if req.kind == "sncrs":
            sx = sz.load_simplicial_ncrs(req.payload)
            out, head = wbarn(sx)
            ok, msgs = head.validate()
            if hasattr(out, "tail"):
                payload = sz.dump_simplicial_ncrs(out)
            else:
                payload = {"kind": "sxmod_linear",
                           "base": sz.dump_groupoid(sx.base),
                           "module": sz.dump_simplicial_module(head)}
            return {"output": payload, "identities_verified": bool(ok)}
        raise ParseError(f"unknown simplicial kind {req.kind}")
    return _run(go)
