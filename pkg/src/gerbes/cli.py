"""Command-line workflows over JSON artifacts.

Exit codes: 0 success, 1 validation failure, 2 size bound exceeded, 3 parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from . import groups as grp
from .cohomology import DEFAULT_ENUM_LIMIT, GroupoidModule, cech_cohomology, cech_complex, classify_bound_gerbes, cochain_dim, groupoid_cohomology
from .errors import GerbeError, GroupAxiomError, GroupoidAxiomError, ParseError, SizeBound
from .extensions import band, band_class, extension_from_cocycle, validate_cocycle
from .groupoids import NERVE, POINTWISE, validate_groupoid
from .io import Workspace, dumps, cocycle_to_json, infer_kind, parse_cover, parse_group, parse_groupoid, parse_nerve
from .morita import check_band_morita, check_cohomology_morita, pullback_extension, refinement_extension

EXIT_OK, EXIT_INVALID, EXIT_SIZE, EXIT_PARSE = 0, 1, 2, 3


def _fmt_key(key: tuple) -> str:
    idx = ",".join(str(k) for k in key[:-1])
    return idx if key[-1] is None else f"{idx}@{key[-1]}"


def _coeff(text: str) -> int | None:
    t = text.strip().upper()
    if t in ("Q", "0"):
        return None
    if t == "Z":
        return 0
    try:
        m = int(t)
    except ValueError:
        raise ParseError(f"coefficient must be Q, Z or a modulus, got {text!r}") from None
    if m < 2:
        raise ParseError("modulus must be at least 2")
    return m


# subcommands


def cmd_validate(args, ws: Workspace, out: list[str]) -> int:
    failed = False
    for path in args.paths:
        obj = ws.raw(path)
        kind = infer_kind(obj)
        problems: list[str] = []
        try:
            if kind == "group":
                G = parse_group(obj, check=False)
                problems = [" ".join(map(str, v)) for v in grp.group_violations(G.table)]
            elif kind == "cover":
                parse_cover(obj, args.mode)
            elif kind == "nerve":
                parse_nerve(obj)
            elif kind == "groupoid":
                validate_groupoid(parse_groupoid(obj))
            elif kind == "cocycle":
                data = ws.cocycle_from(obj, Path(path).parent)
                problems = validate_cocycle(data).lines()
            elif kind == "refinement":
                ws.refinement(path).check()
        except (GroupAxiomError, GroupoidAxiomError) as e:
            problems = [f"{type(e).__name__}: {e}"]
        except ParseError:
            raise
        except SizeBound:
            raise
        except GerbeError as e:
            problems = [f"{type(e).__name__}: {e}"]
        if problems:
            failed = True
            out.append(f"{path} ({kind}): {len(problems)} violation{'s' if len(problems) != 1 else ''}")
            out.extend(f"  {p}" for p in problems)
        else:
            out.append(f"{path} ({kind}): ok")
    return EXIT_INVALID if failed else EXIT_OK


def cmd_classify(args, ws: Workspace, out: list[str]) -> int:
    G = ws.group(args.group)
    if G.order > args.limit_order:
        raise SizeBound(f"group order {G.order} exceeds --limit-order {args.limit_order}")
    N = ws.nerve(args.nerve)
    res = classify_bound_gerbes(N, G, limit=args.limit_enum, strict=args.strict)
    factors = " x ".join(f"Z{a}" for a in res.center_factors) or "0"
    out.append(f"group: {G.name or 'custom'} (order {G.order})")
    out.append(f"center: order {len(res.center)}, {factors}")
    out.append(f"nerve: simplices per dimension {' '.join(map(str, N.counts()))}")
    out.append(f"H2(nerve; center): {res.h2} (order {res.h2.order})")
    out.append(f"{res.count} class{'es' if res.count != 1 else ''}")
    if res.representatives is None:
        out.append("representatives: not enumerated (size bound); count taken from H2")
    else:
        for r, rep in enumerate(res.representatives):
            vals = " ".join(f"{','.join(map(str, t))}:{v}" for t, v in zip(res.triangles, rep))
            out.append(f"representative {r}: {vals or '(no triangles)'}")
    return EXIT_OK


def cmd_band(args, ws: Workspace, out: list[str]) -> int:
    data = ws.cocycle(args.cocycle)
    rep = validate_cocycle(data)
    if not rep.ok:
        out.append("invalid cocycle:")
        out.extend(f"  {line}" for line in rep.lines())
        return EXIT_INVALID
    b = band(data)
    out.append(f"group: {data.group.name or 'custom'}  |Out| = {b.out.order}  mode: {data.mode}")
    out.append("band values on edges i<j (Out index):")
    for key in sorted((k for k in b.values if k[0] < k[1]), key=lambda k: (k[-1] if k[-1] is not None else -1,) + k[:-1]):
        out.append(f"  {_fmt_key(key)}: {b.values[key]}")
    bc = band_class(b)
    if bc.trivial:
        out.append("band: trivial")
        eta = bc.trivialization
        out.append("trivialization: " + " ".join(f"{_fmt_key(v)}={eta[v]}" for v in sorted(eta, key=lambda v: (v[-1] if v[-1] is not None else -1, v[0]))))
    else:
        out.append("band: nontrivial")
        for key, hol, cls in bc.nontrivial_loops():
            out.append(f"holonomy at edge {_fmt_key(key)}: {hol} (class {{{', '.join(map(str, cls))}}})")
    return EXIT_OK


def cmd_cohomology(args, ws: Workspace, out: list[str]) -> int:
    n = args.degree
    coeff = _coeff(args.coeff)
    target = args.target
    if target in grp.BUILTIN or not Path(target).exists():
        G = ws.group(target)
        module = args.module or "trivial"
        if module == "trivial":
            if coeff == 0:
                raise ParseError("group cohomology takes Q or a modulus")
            M = grp.GroupModule.trivial(G, 1, coeff)
        elif module == "sign":
            chars = grp.sign_characters(G)
            if len(chars) < 2:
                raise GerbeError(f"{G.name} has no nontrivial sign character")
            if coeff == 0:
                raise ParseError("group cohomology takes Q or a modulus")
            M = grp.GroupModule.character(G, chars[1], coeff)
        else:
            raise ParseError("group targets take --module trivial or sign")
        h = grp.group_cohomology(M, n, size_limit=args.limit_cells)
        out.append(f"group cohomology H^{n}({G.name}; {module} {M.coefficient})")
        out.append(f"cochain dimensions: C^{n} = {G.order ** n}, C^{n + 1} = {G.order ** (n + 1)}")
        out.append(f"H^{n} = {h}")
        return EXIT_OK
    kind = infer_kind(ws.raw(target))
    if kind in ("nerve", "cover"):
        N = ws.nerve(target)
        if not 0 <= n <= 3:
            raise ParseError("Cech degree must be in 0..3")
        C = cech_complex(N)
        h = cech_cohomology(N, [coeff if coeff is not None else 0], n)
        ring = "Z" if not coeff else f"Z/{coeff}"
        out.append(f"Cech cohomology H^{n}(nerve; {ring})")
        out.append(f"cochain dimensions: {' '.join(str(d) for d in C.dims)}")
        out.append(f"H^{n} = {h}")
        return EXIT_OK
    if kind == "cocycle":
        if not 0 <= n <= 2:
            raise ParseError("groupoid degree must be in 0..2")
        if coeff == 0:
            raise ParseError("groupoid cohomology takes Q or a modulus")
        data = ws.cocycle(target)
        E = extension_from_cocycle(data)
        X = E.total
        module = args.module or "trivial"
        if module == "trivial":
            M = GroupoidModule.trivial(X, 1, coeff)
        elif module == "adjoint":
            M = GroupoidModule.adjoint(X, [E.kernel_fiber(m).tolist() for m in range(X.n_objects)], coeff)
        else:
            raise ParseError("extension targets take --module trivial or adjoint")
        h = groupoid_cohomology(M, n, args.side, limit=args.limit_cells)
        out.append(f"groupoid cohomology H^{n}(total groupoid; {module} {M.coefficient}, {args.side} complex)")
        out.append(f"total groupoid: {X.n_objects} objects, {X.n_arrows} arrows")
        out.append(f"cochain dimensions: C^{n} = {cochain_dim(M, n, args.side)}, C^{n + 1} = {cochain_dim(M, n + 1, args.side)}")
        out.append(f"H^{n} = {h}")
        return EXIT_OK
    raise ParseError(f"cannot take cohomology of a {kind} file")


def _morita_lines(E, E2, md, out, module: str, coeff) -> bool:
    bres = check_band_morita(E, E2, md)
    out.append(f"band agrees with pullback: {'yes' if bres else 'no'}")
    if not bres:
        out.append(f"  first mismatch at {bres.witness}: {bres.details}")
    cres = check_cohomology_morita(E, E2, md, module, coeff)
    for deg, (a, b) in sorted(cres.details.items()):
        out.append(f"  H^{deg} ({module}): {a} vs {b}")
    out.append(f"cohomology agrees: {'yes' if cres else 'no'}")
    return bool(bres) and bool(cres)


def cmd_pullback(args, ws: Workspace, out: list[str]) -> int:
    data = ws.cocycle(args.cocycle)
    E = extension_from_cocycle(data)
    n0 = E.total.n_objects
    if args.map:
        J = [int(x) for x in args.map.split(",")]
    else:
        J = list(range(n0)) + ([args.double] if args.double is not None else [])
    if any(not 0 <= j < n0 for j in J):
        raise ParseError(f"map values must be objects 0..{n0 - 1}")
    E2, md = pullback_extension(E, J)
    out.append(f"map: {','.join(map(str, J))}")
    out.append(f"total: {E.total.n_objects} objects, {E.total.n_arrows} arrows -> {E2.total.n_objects} objects, {E2.total.n_arrows} arrows")
    out.append(f"base: {E.base.n_arrows} arrows -> {E2.base.n_arrows} arrows")
    out.append("kernel fibers: pulled back isomorphically")
    ok = _morita_lines(E, E2, md, out, args.module, _coeff(args.coeff))
    return EXIT_OK if ok else EXIT_INVALID


def cmd_refine(args, ws: Workspace, out: list[str]) -> int:
    data = ws.cocycle(args.cocycle)
    ref = ws.refinement(args.refinement).check()
    E, E2, md = refinement_extension(data, ref)
    out.append(f"coarse sets: {' '.join('{' + ','.join(map(str, s)) + '}' for s in ref.coarse.sets)}")
    out.append(f"fine sets: {' '.join('{' + ','.join(map(str, s)) + '}' for s in ref.fine.sets)}")
    out.append(f"map: {','.join(map(str, ref.r))}")
    rep = validate_cocycle(E2.data)
    out.append(f"refined cocycle: {'valid' if rep.ok else 'invalid'}")
    out.append(f"total arrows: {E.total.n_arrows} -> {E2.total.n_arrows}")
    b = band_class(band(E2.data))
    out.append(f"refined band: {'trivial' if b.trivial else 'nontrivial'}")
    if args.emit:
        Path(args.emit).write_text(dumps(cocycle_to_json(E2.data)))
        out.append(f"wrote {args.emit}")
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_check_morita(args, ws: Workspace, out: list[str]) -> int:
    data = ws.cocycle(args.cocycle)
    ref = ws.refinement(args.refinement).check()
    E, E2, md = refinement_extension(data, ref)
    out.append(f"refinement: {ref.coarse.n_sets} sets -> {ref.fine.n_sets} sets")
    ok = _morita_lines(E, E2, md, out, args.module, _coeff(args.coeff))
    out.append("Morita checks: " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_INVALID


# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--limit-order", type=int, default=grp.DEFAULT_ORDER_BOUND, help="largest group order for automorphism enumeration")
    common.add_argument("--limit-enum", type=int, default=DEFAULT_ENUM_LIMIT, help="largest enumeration size for classification")
    common.add_argument("--limit-cells", type=int, default=4 * 10**7, help="largest differential matrix (entries)")
    common.add_argument("--mode", choices=(POINTWISE, NERVE), help="override the mode of every cover")
    common.add_argument("--out", help="write the report to this file instead of stdout")

    p = _Parser(prog="gerbes", description="Finite-model non-abelian gerbes: cocycles, bands, classification, cohomology, Morita checks.")
    p.add_argument("--version", action="version", version=f"gerbes {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="validate group, cover, nerve, groupoid, cocycle or refinement files")
    s.add_argument("paths", nargs="+")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("classify", parents=[common], help="classify gerbes bound by a group over a nerve")
    s.add_argument("group", help="builtin name (S3, Q8, Z4, ...) or group file")
    s.add_argument("nerve", help="nerve or cover file")
    s.add_argument("--strict", action="store_true", help="fail instead of falling back to the H2 count")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("band", parents=[common], help="band of a cocycle with triviality verdict")
    s.add_argument("cocycle")
    s.set_defaults(func=cmd_band)

    s = sub.add_parser("cohomology", parents=[common], help="Cech, group or groupoid cohomology")
    s.add_argument("target", help="nerve/cover file, cocycle file (total groupoid) or builtin group")
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--coeff", default="Q", help="Q, Z or a modulus m")
    s.add_argument("--module", choices=("trivial", "sign", "adjoint"))
    s.add_argument("--side", choices=("left", "right"), default="right")
    s.set_defaults(func=cmd_cohomology)

    s = sub.add_parser("pullback", parents=[common], help="pull an extension back along an object map")
    s.add_argument("cocycle")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--map", help="comma-separated target objects, one per new object")
    g.add_argument("--double", type=int, help="append a copy of this object")
    s.add_argument("--module", choices=("trivial", "adjoint"), default="trivial")
    s.add_argument("--coeff", default="Q")
    s.set_defaults(func=cmd_pullback)

    s = sub.add_parser("refine", parents=[common], help="refine a cocycle along a refinement file")
    s.add_argument("cocycle")
    s.add_argument("refinement")
    s.add_argument("--emit", help="write the refined cocycle to this path")
    s.set_defaults(func=cmd_refine)

    s = sub.add_parser("check-morita", parents=[common], help="band and cohomology invariance under a refinement")
    s.add_argument("cocycle")
    s.add_argument("refinement")
    s.add_argument("--module", choices=("trivial", "adjoint"), default="trivial")
    s.add_argument("--coeff", default="Q")
    s.set_defaults(func=cmd_check_morita)
    return p


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Run a command and return (exit code, report text)."""
    out: list[str] = []
    try:
        args = build_parser().parse_args(argv)
        ws = Workspace(mode=args.mode, limit_order=args.limit_order)
        code = args.func(args, ws, out)
    except ParseError as e:
        return EXIT_PARSE, f"parse error: {e}\n"
    except SizeBound as e:
        return EXIT_SIZE, f"size bound: {e}\n"
    except GerbeError as e:
        return EXIT_INVALID, "\n".join(out + [f"{type(e).__name__}: {e}"]) + "\n"
    return code, "\n".join(out) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    args_list = list(sys.argv[1:] if argv is None else argv)
    code, text = run(args_list)
    try:
        target = build_parser().parse_known_args(args_list)[0].out
    except (ParseError, SystemExit):
        target = None
    if target:
        Path(target).write_text(text)
    else:
        stream = sys.stdout if code in (EXIT_OK, EXIT_INVALID) else sys.stderr
        stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
