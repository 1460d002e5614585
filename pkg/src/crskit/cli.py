"""Batch front-end: a thin client of the crskit service.

Each subcommand reads presentation files, posts them to the service (an
in-process instance by default, or --server URL) and writes the response
deterministically.  Exit codes: 0 ok, 2 validation failure, 3 parse
error, 4 size cap.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx

from . import serialize as sz

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARSE = 3
EXIT_SIZE = 4

ERROR_EXITS = {"parse": EXIT_PARSE, "validation": EXIT_VALIDATION,
               "range": EXIT_VALIDATION, "size": EXIT_SIZE}


class InProcessTransport(httpx.BaseTransport):
    """Serve requests from the ASGI app inside this process."""

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request):
        import asyncio

        async def go():
            resp = await self._asgi.handle_async_request(request)
            chunks = [c async for c in resp.stream]
            return httpx.Response(resp.status_code, headers=resp.headers,
                                  content=b"".join(chunks), request=request)
        return asyncio.run(go())


def make_client(server=None):
    if server:
        return httpx.Client(base_url=server)
    from .service import app
    return httpx.Client(transport=InProcessTransport(app),
                        base_url="http://crskit.local")


def read_payload(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise sz.ParseError(f"cannot read {path}: {e}") from e
    return sz.loads(text)


def emit(args, body, exit_code):
    if args.format == "json":
        text = sz.dumps(body)
    else:
        text = render_text(body)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return exit_code


def render_text(body, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(body, dict):
        for k in sorted(body):
            v = body[k]
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1).rstrip("\n"))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(body, list):
        for v in body:
            if isinstance(v, (dict, list)):
                lines.append(render_text(v, indent).rstrip("\n"))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{body}")
    return "\n".join(lines) + "\n"


def respond(args, resp):
    body = resp.json()
    if not body.get("ok"):
        err = body.get("error") or {}
        code = ERROR_EXITS.get(err.get("kind"), EXIT_VALIDATION)
        return emit(args, {"error": err}, code)
    result = body.get("result") or {}
    code = EXIT_OK
    if result.get("valid") is False or result.get("passed") is False \
            or result.get("torsor_valid") is False:
        code = EXIT_VALIDATION
    return emit(args, result, code)


def kind_of(payload):
    if "kind" in payload:
        return payload["kind"]
    if "higher" in payload or "rank" in payload:
        return "crs"
    if "delta" in payload:
        return "xmod"
    return "groupoid"


def cmd_validate(args, client):
    payload = read_payload(args.path)
    kind = args.kind or kind_of(payload)
    return respond(args, client.post("/validate",
                                     json={"kind": kind, "payload": payload}))


def cmd_pi(args, client):
    payload = read_payload(args.path)
    return respond(args, client.post("/pi", json={"complex": payload,
                                                  "stage": args.stage}))


def cmd_tower(args, client):
    payload = read_payload(args.path)
    return respond(args, client.post("/tower", json={"complex": payload}))


def cmd_fiber(args, client):
    payload = read_payload(args.path)
    if args.stage is None or args.object is None:
        raise sz.ParseError("fiber needs --stage and --object")
    return respond(args, client.post(
        "/fiber", json={"complex": payload, "stage": args.stage,
                        "object": args.object}))


def cmd_extension(args, client):
    payload = read_payload(args.path)
    return respond(args, client.post(
        "/extension", json={"complex": payload, "stage": args.stage}))


def cmd_torsor(args, client):
    payload = read_payload(args.path)
    return respond(args, client.post(
        "/torsor", json={"complex": payload, "stage": args.stage}))


def cmd_em_check(args, client):
    payload = read_payload(args.path)
    if args.stage is None or args.trunc is None:
        raise sz.ParseError("em-check needs --stage (n) and --trunc (m)")
    if "pi" not in payload or "A" not in payload:
        raise sz.ParseError("coefficient file needs 'pi' and 'A'")
    return respond(args, client.post(
        "/em-check", json={"n": args.stage, "m": args.trunc,
                           "pi": payload["pi"], "coefficients": payload["A"],
                           "against_l": bool(args.against_l)}))


def cmd_wbar(args, client):
    payload = read_payload(args.path)
    kind = args.kind or payload.get("kind")
    if kind not in ("sgpd", "sxmod", "sncrs"):
        raise sz.ParseError(f"wbar input must declare a simplicial kind, got {kind}")
    return respond(args, client.post("/wbar", json={"kind": kind,
                                                    "payload": payload}))


def build_parser():
    p = argparse.ArgumentParser(
        prog="crskit",
        description="groupoids, crossed complexes, Postnikov towers, torsors")
    p.add_argument("--server", help="service URL (default: in-process)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("path")
        sp.add_argument("--stage", type=int, default=None,
                        help="tower stage / homotopy degree N")
        sp.add_argument("--object", default=None, help="object X")
        sp.add_argument("--trunc", type=int, default=None,
                        help="truncation level L / EM degree")
        sp.add_argument("--out", default=None, help="output path")
        sp.add_argument("--format", choices=["json", "text"], default="json")
        sp.add_argument("--kind", default=None, help="payload kind override")
        return sp

    common(sub.add_parser("validate", help="validate a presentation file")) \
        .set_defaults(fn=cmd_validate)
    common(sub.add_parser("pi", help="homotopy group of a complex")) \
        .set_defaults(fn=cmd_pi)
    common(sub.add_parser("tower", help="full Postnikov tower dump")) \
        .set_defaults(fn=cmd_tower)
    common(sub.add_parser("fiber", help="tower fiber over an object")) \
        .set_defaults(fn=cmd_fiber)
    common(sub.add_parser("extension", help="stage extension as JSON")) \
        .set_defaults(fn=cmd_extension)
    common(sub.add_parser("torsor", help="torsor + axiom report + U-split")) \
        .set_defaults(fn=cmd_torsor)
    em = common(sub.add_parser(
        "em-check", help="EM ladder report (--stage n, --trunc m)"))
    em.add_argument("--against-l", action="store_true", dest="against_l",
                    help="check W-bar_1 against the fibration levels instead")
    em.set_defaults(fn=cmd_em_check)
    common(sub.add_parser("wbar", help="apply the classifying functor")) \
        .set_defaults(fn=cmd_wbar)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with make_client(args.server) as client:
            return args.fn(args, client)
    except sz.ParseError as e:
        sys.stdout.write(sz.dumps({"error": {"kind": "parse",
                                             "message": str(e)}}))
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
