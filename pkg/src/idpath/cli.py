"""Command-line driver.

    idpath check <file> [--strong-sums] [--format text|records]
    idpath derive <kind> [--type T | --context TEL | --names N...]
                  [--file F] [--strong-sums] [--emit OUT]
    idpath explain <kind>
    idpath serve [--host H] [--port P]

Exit codes: 0 all judgments accepted, 1 some judgment or re-check failed,
2 parse errors, missing files or bad arguments.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import drive, loader, surface as sf
from .checker import CheckError


def _use_color() -> bool:
    return os.environ.get("IDPATH_COLOR", "0") == "1"


def _verdict(ok: bool) -> str:
    word = "accept" if ok else "reject"
    if _use_color():
        code = "32" if ok else "31"
        return f"\x1b[{code}m{word}\x1b[0m"
    return word


def _derive_handler(out_lines: list[str]):
    def handler(sig, directive: sf.DeriveDirective):
        outcome = drive.run_derive(sig, directive.kind, directive.params, directive.names)
        out_lines.extend("  " + line for line in outcome.lines)
        new_sig = outcome.sig if outcome.sig is not None else sig
        return outcome.report(), new_sig

    return handler


def _describe(d: sf.Directive) -> str:
    match d:
        case sf.FlagDirective(flag):
            return f"flag {flag}"
        case sf.PostulateType(name, _):
            return f"postulate {name}"
        case sf.PostulateTerm(name, _, _):
            return f"postulate {name}"
        case sf.DefDirective(name, _, _, _):
            return f"def {name}"
        case sf.CheckTerm(_, _, _):
            return "check term"
        case sf.CheckType(_, _):
            return "check type"
        case sf.DeriveDirective(kind, _, _):
            return f"derive {kind}"
    return "directive"


def run_check(path: str, strong_sums: bool, fmt: str, stream=sys.stdout) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        parsed = sf.parse(text)
    except sf.ParseError as e:
        if fmt == "records":
            print(json.dumps({"verdict": "error", "detail": str(e)}), file=stream)
        else:
            print(f"parse error: {e}", file=stream)
        return 2
    detail_lines: list[str] = []
    _, results = loader.run_directives(
        parsed, strong_sums=strong_sums, derive_handler=_derive_handler(detail_lines)
    )
    all_ok = True
    for r in results:
        ok = r.report.ok
        all_ok &= ok
        if fmt == "records":
            rec = {
                "line": r.line,
                "directive": _describe(r.directive),
                "verdict": "accept" if ok else "reject",
            }
            if not ok:
                rec["rule"] = r.report.rule
                rec["detail"] = r.report.detail
            print(json.dumps(rec), file=stream)
        else:
            msg = f"line {r.line}: {_describe(r.directive)} ... {_verdict(ok)}"
            if not ok and r.report.detail:
                msg += f"  [{r.report.rule}] {r.report.detail}"
            print(msg, file=stream)
            if isinstance(r.directive, sf.DeriveDirective) and detail_lines:
                for line in detail_lines:
                    print(line, file=stream)
                detail_lines.clear()
    return 0 if all_ok else 1


def run_derive_cmd(args, stream=sys.stdout) -> int:
    kind = args.kind
    if kind not in drive.DERIVE_KINDS:
        print(f"error: unknown derive kind {kind!r}", file=sys.stderr)
        return 2
    base_text = ""
    sig_source = None
    if args.file:
        try:
            with open(args.file, encoding="utf-8") as fh:
                base_text = fh.read()
            sig_source = sf.parse(base_text)
        except (OSError, sf.ParseError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    try:
        sig = loader.load_signature(sig_source, strong_sums=args.strong_sums) if sig_source else None
    except CheckError as e:
        print(f"error: signature does not check: {e}", file=sys.stderr)
        return 2
    if sig is None:
        from .syntax import Signature

        sig = Signature().with_strong_sums(args.strong_sums)
    params: tuple = ()
    names: tuple = tuple(args.names or ())
    if args.context:
        try:
            params = sf.parse_params_text(args.context)
        except sf.ParseError as e:
            print(f"error: bad context: {e}", file=sys.stderr)
            return 2
    elif args.type:
        try:
            params = sf.parse_params_text(f"(it : {args.type})")
        except sf.ParseError as e:
            print(f"error: bad type: {e}", file=sys.stderr)
            return 2
    outcome = drive.run_derive(sig, kind, params, names)
    for line in outcome.lines:
        print(line, file=stream)
    if not outcome.ok:
        if outcome.detail:
            print(f"derive failed: {outcome.detail}", file=stream)
        return 1
    if args.emit:
        emitted = drive.emitted_source(base_text, outcome)
        try:
            with open(args.emit, "w", encoding="utf-8") as fh:
                fh.write(emitted)
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        print(f"emitted {args.emit}", file=stream)
    return 0


def run_explain(kind: str, stream=sys.stdout) -> int:
    text = drive.EXPLANATIONS.get(kind)
    if text is None:
        print(f"error: unknown derive kind {kind!r}", file=sys.stderr)
        return 2
    print(text, file=stream)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="idpath", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="check every directive in a file")
    p_check.add_argument("file")
    p_check.add_argument("--strong-sums", action="store_true")
    p_check.add_argument("--format", choices=("text", "records"), default="text")

    p_derive = sub.add_parser("derive", help="run a construction and re-check it")
    p_derive.add_argument("kind")
    p_derive.add_argument("--file", help="signature file to load first")
    p_derive.add_argument("--type", help="name of a base type")
    p_derive.add_argument("--context", help="telescope, e.g. \"(x : A) (b : B x)\"")
    p_derive.add_argument("--names", nargs="*", help="names of signature entities")
    p_derive.add_argument("--strong-sums", action="store_true")
    p_derive.add_argument("--emit", help="write a standalone source file")

    p_explain = sub.add_parser("explain", help="describe how a derive kind works")
    p_explain.add_argument("kind")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return run_check(args.file, args.strong_sums, args.format)
    if args.command == "derive":
        return run_derive_cmd(args)
    if args.command == "explain":
        return run_explain(args.kind)
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
