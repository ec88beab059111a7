"""Command-line front end.

Exit codes: 0 certified or success, 2 analysis completed but not certified
(or a reproduction check failed), 3 invalid input, 4 internal or resource
error. Errors are printed to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__

log = logging.getLogger("midsub")

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 2
EXIT_INVALID = 3
EXIT_INTERNAL = 4


def _fail(kind: str, message: str, code: int, **extra) -> int:
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)
    return code


def _verdict_code(cert) -> int:
    from .certificate import INVALID

    if cert.certified:
        return EXIT_OK
    return EXIT_INVALID if cert.verdict == INVALID else EXIT_NOT_CERTIFIED


def _emit(cert, args) -> int:
    cert.config = args.config_obj.to_dict()
    print(cert.to_json(timestamp=not args.no_timestamp))
    return _verdict_code(cert)


# -- subcommands --------------------------------------------------------------

def cmd_subdivide(args) -> int:
    from .mesh import read_obj, write_obj
    from .operators import subdivide

    mesh = read_obj(args.input)
    res = subdivide(mesh, args.word, args.steps)
    write_obj(res.mesh, args.out)
    for r in res.rounds:
        print(f"round {r['round']}: {r['vertices']} vertices, {r['faces']} faces, "
              f"{r['kind']} ({r['lattice']} lattice)")
    return EXIT_OK


def cmd_certify(args) -> int:
    from .characteristic import certify_extraordinary
    from .regular import certify_regular

    cfg = args.config_obj
    if args.target == "regular":
        cert = certify_regular(args.word)
    else:
        if args.valence is None:
            return _fail("InvalidParameter", "--valence is required", EXIT_INVALID)
        cert = certify_extraordinary(args.word, args.valence, rho=cfg.rho,
                                     steps=cfg.cone_steps, tol=cfg.angle_tol)
    return _emit(cert, args)


def cmd_spectrum(args) -> int:
    from .spectral import _even_word, _word, build_subdivision_matrix, spectrum_report

    cfg = args.config_obj
    rep = spectrum_report(args.word, args.valence, rho=cfg.rho, tol=cfg.eig_tol,
                          max_iter=cfg.max_iter)
    data = rep.to_dict()
    data["config"] = cfg.to_dict()
    from .certificate import dumps

    print(dumps(data))
    if args.csv:
        Path(args.csv).write_text(rep.csv())
    if args.dump_matrix:
        mat = build_subdivision_matrix(_even_word(_word(args.word)), args.valence, rho=rep.rho)
        Path(args.dump_matrix).write_text(mat.triplets())
    return EXIT_OK


def nabla2_csv(cm) -> str:
    lines = ["i,j,re,im,abs,angle"]
    for (i, j), z in sorted(cm.nabla2().items()):
        z = complex(z)
        ang = math.atan2(z.imag, z.real) if z != 0 else float("nan")
        lines.append(f"{i},{j},{z.real:.17g},{z.imag:.17g},{abs(z):.17g},{ang:.17g}")
    return "\n".join(lines) + "\n"


def cmd_charmap(args) -> int:
    from .certificate import dumps
    from .characteristic import characteristic_mesh
    from .mesh import write_obj

    cfg = args.config_obj
    cm = characteristic_mesh(args.word, args.valence, rho=cfg.rho, tol=cfg.char_tol,
                             max_iter=cfg.char_max_iter)
    write_obj(cm.to_mesh(), args.out)
    csv_path = Path(args.csv) if args.csv else Path(args.out).with_suffix(".csv")
    csv_path.write_text(nabla2_csv(cm))
    print(dumps(cm.to_dict()))
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import acceptance

    saved = dict(acceptance.EXPECTED_NORMS)
    try:
        for item in args.inject or ():
            op, _, value = item.partition("=")
            if op not in acceptance.EXPECTED_NORMS or not value:
                return _fail("InvalidParameter", f"--inject expects OP=VALUE with OP in "
                             f"{sorted(acceptance.EXPECTED_NORMS)}", EXIT_INVALID)
            acceptance.EXPECTED_NORMS[op] = Fraction(value)
        only = None
        if args.only:
            only = {int(x) for x in args.only.split(",") if x.strip()}
        results = acceptance.run_all(only)
    finally:
        acceptance.EXPECTED_NORMS.clear()
        acceptance.EXPECTED_NORMS.update(saved)
    sys.stdout.write(acceptance.tap(results))
    return EXIT_OK if all(r.ok for r in results) else EXIT_NOT_CERTIFIED


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="midsub", description="General midpoint subdivision "
                                "on quad meshes and smoothness certification.")
    p.add_argument("--version", action="version", version=f"midsub {__version__}")
    p.add_argument("--config", help="key = value file with analysis tolerances")
    p.add_argument("--rho", type=int, help="ring count of the analysed net (overrides config)")
    p.add_argument("--cone-steps", type=int, help="subdivision steps for the cone checks")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp so reports are byte-identical across runs")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("subdivide", help="apply an operator word to an OBJ mesh")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--word", required=True)
    s.add_argument("--steps", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_subdivide)

    c = sub.add_parser("certify", help="C1 certificate as JSON")
    c.add_argument("target", choices=("regular", "extraordinary"))
    c.add_argument("--word", required=True)
    c.add_argument("--valence", type=int)
    c.set_defaults(func=cmd_certify)

    e = sub.add_parser("spectrum", help="eigen-data of the subdivision matrix")
    e.add_argument("--word", required=True)
    e.add_argument("--valence", type=int, required=True)
    e.add_argument("--csv", help="write the eigenvalue table to this file")
    e.add_argument("--dump-matrix", help="write S as exact row/col/value triplets")
    e.set_defaults(func=cmd_spectrum)

    m = sub.add_parser("charmap", help="export the characteristic mesh")
    m.add_argument("--word", required=True)
    m.add_argument("--valence", type=int, required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--csv", help="second-difference table (default: OUT with .csv suffix)")
    m.set_defaults(func=cmd_charmap)

    v = sub.add_parser("verify-paper", help="run the reproduction suite (TAP output)")
    v.add_argument("--only", help="comma-separated check numbers")
    v.add_argument("--inject", action="append",
                   help="override an expected norm, e.g. R=1/3 (negative control)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    from .config import load_config, setup_logging
    from .errors import InvalidParameter, MidsubError, NonManifoldError, ResourceError

    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        args.config_obj = load_config(args.config).merged(rho=args.rho,
                                                           cone_steps=args.cone_steps)
        return args.func(args)
    except NonManifoldError as exc:
        return _fail("NonManifoldError", str(exc), EXIT_INVALID,
                     elements=[list(map(int, e)) if hasattr(e, "__iter__") else int(e)
                               for e in exc.elements])
    except InvalidParameter as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INVALID)
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INVALID)
    except (ResourceError, MemoryError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INTERNAL)
    except MidsubError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INTERNAL)
    except Exception as exc:
        log.exception("internal error")
        return _fail("InternalError", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
