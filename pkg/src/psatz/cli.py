"""Command-line front end.

Exit codes:
    0  success (certificate verified, or the requested artifact was written)
    1  input error (unreadable or malformed files, bad flags)
    2  no exact certificate found (solver stalled or rationalization failed); a
       probe report is printed
    3  the chosen shape admits no certificate (inconsistent linear system)
    4  the verifier rejected the certificate
    5  the solver considers the pencil infeasible (advisory, not a proof)
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .exactlinalg import is_psd_exact
from .formats import FormatError, parse_mask, read_certificate, read_pencil, write_certificate, write_pencil
from .parse import ParseError, parse_affine_relation, parse_point, parse_polynomial, parse_problem
from .ratpoly import Problem, ProductSetTooLarge
from .reduction import (
    NoCertificateOfShape,
    Pencil,
    SliceError,
    WitnessShape,
    assemble,
    default_shape,
    rebase,
    shape_of,
    slice,
    slice_relation_text,
)
from .report import format_outcome, format_point, format_probe, write_report_dir
from .sdpnum import SolveStatus, degeneracy_probe, denominator_ladder, rationalize, solve_feasibility
from .verifier import format_witness, verify, verify_from_alpha

EXIT_OK, EXIT_INPUT, EXIT_NO_CERT, EXIT_SHAPE, EXIT_REJECTED, EXIT_INFEASIBLE = range(6)


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    problem_path: Path | None = None
    certificate_path: Path | None = None
    pencil_path: Path | None = None
    blocks: list[str] = field(default_factory=list)
    degree_cap: int = 4
    product_cap: int = 4096
    slices: list[str] = field(default_factory=list)
    point: str | None = None
    tol: float = 1e-7
    max_iter: int = 500
    max_den: int = 10**6
    emit_pencil: Path | None = None
    emit_cert: Path | None = None
    report_dir: Path | None = None

    def validate(self) -> None:
        if self.degree_cap < 0 or self.degree_cap % 2:
            raise InputError("--degree-cap must be a nonnegative even number")
        if self.product_cap < 1:
            raise InputError("--product-cap must be positive")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.max_iter < 1:
            raise InputError("--max-iter must be positive")
        if self.max_den < 1:
            raise InputError("--max-den must be at least 1")
        for p in (self.problem_path, self.certificate_path, self.pencil_path):
            if p is not None and not p.is_file():
                raise InputError(f"cannot read {p}")


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _diag(path: Path | None, exc: ParseError) -> str:
    where = f"{path}:" if path else ""
    return f"{where}{exc.line}:{exc.col}: {exc.detail}"


def parse_block_spec(text: str, variables: Sequence[str]) -> tuple[int, tuple]:
    """``{1,2}:1,a,b`` -> (mask, monomials); ``{}:1`` is the empty product."""
    head, sep, body = text.partition(":")
    if not sep:
        raise InputError(f"block spec {text!r} must look like '{{1}}:1,a,b'")
    try:
        mask = parse_mask(head.replace(" ", ""), 1)
    except FormatError as exc:
        raise InputError(f"block spec {text!r}: {exc.detail}") from None
    monos = []
    for part in body.split(","):
        try:
            p = parse_polynomial(part.strip(), variables)
        except ParseError as exc:
            raise InputError(f"block spec {text!r}: {exc.detail}") from None
        if len(p.terms) != 1 or next(iter(p.terms.values())) != 1:
            raise InputError(f"block spec {text!r}: {part.strip()!r} is not a monomial")
        monos.append(next(iter(p.terms)))
    return mask, tuple(monos)


def _load_problem(cfg: RunConfig) -> Problem:
    try:
        return parse_problem(_read(cfg.problem_path))
    except ParseError as exc:
        raise InputError(_diag(cfg.problem_path, exc)) from None


def _load_pencil_file(cfg: RunConfig) -> Pencil:
    try:
        return read_pencil(_read(cfg.pencil_path))
    except ParseError as exc:
        raise InputError(_diag(cfg.pencil_path, exc)) from None


def choose_shape(cfg: RunConfig, prob: Problem, template: Pencil | None) -> WitnessShape:
    degs = tuple(cfg.degree_cap - z.degree for z in prob.equalities)
    if cfg.blocks:
        parsed = [parse_block_spec(b, prob.variables) for b in cfg.blocks]
        masks = [m for m, _ in parsed]
        if len(set(masks)) != len(masks):
            raise InputError("each product may appear in only one --block")
        return WitnessShape(tuple(masks), dict(parsed), degs)
    if template is not None and template.has_provenance():
        return shape_of(template, len(prob.equalities), None if template.lambda_map else degs)
    return default_shape(prob, cfg.degree_cap, cfg.product_cap)


def build_pencil(cfg: RunConfig, out) -> tuple[Problem | None, Pencil]:
    """Problem (if given) and the pencil after basis adoption and slicing."""
    template = _load_pencil_file(cfg) if cfg.pencil_path else None
    prob = None
    if cfg.problem_path:
        prob = _load_problem(cfg)
        try:
            shape = choose_shape(cfg, prob, template)
            shape.validate(prob)
        except ProductSetTooLarge as exc:
            raise InputError(str(exc)) from None
        except ValueError as exc:
            raise InputError(f"invalid shape: {exc}") from None
        pencil = assemble(prob, shape)
        if template is not None:
            try:
                pencil = rebase(pencil, template.F0, template.basis)
            except ValueError as exc:
                raise InputError(f"{cfg.pencil_path}: {exc}") from None
            print(f"adopted the parameter basis of {cfg.pencil_path}", file=out)
    elif template is not None:
        pencil = template
    else:
        raise InputError("give a problem file or --pencil")
    for rel in cfg.slices:
        try:
            coeffs, rhs = parse_affine_relation(rel, pencil.m)
            pencil = slice(pencil, coeffs, rhs)
        except ParseError as exc:
            raise InputError(f"--slice {rel!r}: {exc.detail}") from None
        except SliceError as exc:
            raise InputError(f"--slice {rel!r}: {exc}") from None
        print(f"sliced by {slice_relation_text(coeffs, rhs)}; {pencil.m} parameter(s) remain", file=out)
    return prob, pencil


def _emit(path: Path | None, text: str, out) -> None:
    if path is None:
        return
    try:
        path.write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None
    print(f"wrote {path}", file=out)


def _accept_point(cfg: RunConfig, prob: Problem | None, pencil: Pencil, point: list[Fraction], out) -> bool:
    """Exact check of a rational point; writes the certificate when there is one."""
    if prob is None or not pencil.has_provenance():
        return is_psd_exact(pencil.matrix_at(point)).is_psd
    verdict = verify_from_alpha(pencil, point, prob)
    if not verdict.valid:
        return False
    cert = pencil.certificate_at(point)
    print(format_witness(prob, cert, verdict), file=out)
    _emit(cfg.emit_cert, write_certificate(cert), out)
    return True


def _rationalize_and_check(cfg, prob, pencil, alpha, out) -> list[Fraction] | None:
    for den in denominator_ladder(cfg.max_den):
        point = rationalize(alpha, den)
        if _accept_point(cfg, prob, pencil, point, out):
            print(f"rationalization: max_den {den} -> {format_point(point)}: exactly verified", file=out)
            return point
    print(f"rationalization: no denominator up to {cfg.max_den} gives an exactly valid point", file=out)
    return None


def _probe(pencil: Pencil, point: list[Fraction], out) -> None:
    print(format_probe(degeneracy_probe(pencil, point), point), file=out)


def cmd_assemble(cfg: RunConfig, out) -> int:
    prob, pencil = build_pencil(cfg, out)
    text = write_pencil(pencil)
    if cfg.emit_pencil:
        _emit(cfg.emit_pencil, text, out)
    else:
        out.write(text)
    print(f"pencil: {pencil.m} parameter(s), size {pencil.size}, {len(pencil.blocks)} block(s)", file=out)
    return EXIT_OK


def _solve_and_report(cfg: RunConfig, prob, pencil: Pencil, out, probe_on_failure: bool) -> int:
    _emit(cfg.emit_pencil, write_pencil(pencil), out)
    if pencil.m == 0:
        print("no free parameters left: deciding by one exact PSD test", file=out)
        if _accept_point(cfg, prob, pencil, [], out):
            return EXIT_OK
        if probe_on_failure:
            _probe(pencil, [], out)
        return EXIT_NO_CERT
    outcome = solve_feasibility(pencil, tol=cfg.tol, max_iter=cfg.max_iter)
    print(format_outcome(outcome), file=out)
    if cfg.report_dir:
        for p in write_report_dir(cfg.report_dir, outcome, pencil):
            print(f"wrote {p}", file=out)
    if outcome.status is SolveStatus.FEASIBLE:
        if _rationalize_and_check(cfg, prob, pencil, outcome.alpha, out) is not None:
            return EXIT_OK
    elif outcome.status is SolveStatus.LIKELY_INFEASIBLE:
        print("the pencil looks infeasible (numerical evidence only, not a proof)", file=out)
        return EXIT_INFEASIBLE
    if probe_on_failure:
        point = rationalize(outcome.alpha, cfg.max_den)
        _probe(pencil, point, out)
        print("no exact certificate found; the solution set may have empty interior (try --slice)", file=out)
    return EXIT_NO_CERT


def cmd_solve(cfg: RunConfig, out) -> int:
    prob, pencil = build_pencil(cfg, out)
    return _solve_and_report(cfg, prob, pencil, out, probe_on_failure=False)


def cmd_pipeline(cfg: RunConfig, out) -> int:
    if cfg.problem_path is None:
        raise InputError("pipeline needs a problem file")
    prob, pencil = build_pencil(cfg, out)
    return _solve_and_report(cfg, prob, pencil, out, probe_on_failure=True)


def cmd_probe(cfg: RunConfig, out) -> int:
    _, pencil = build_pencil(cfg, out)
    if cfg.point is None:
        raise InputError("probe needs --point")
    try:
        point = parse_point(cfg.point, pencil.m)
    except ParseError as exc:
        raise InputError(f"--point: {exc.detail}") from None
    _probe(pencil, point, out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    if cfg.problem_path is None or cfg.certificate_path is None:
        raise InputError("verify needs a problem file and a certificate file")
    prob = _load_problem(cfg)
    try:
        cert = read_certificate(_read(cfg.certificate_path))
    except ParseError as exc:
        raise InputError(_diag(cfg.certificate_path, exc)) from None
    verdict = verify(prob, cert)
    if not verdict.valid:
        print(f"INVALID: {verdict.reason}", file=out)
        return EXIT_REJECTED
    print("VALID", file=out)
    print(format_witness(prob, cert, verdict), file=out)
    return EXIT_OK


COMMANDS = {
    "assemble": cmd_assemble,
    "solve": cmd_solve,
    "probe": cmd_probe,
    "verify": cmd_verify,
    "pipeline": cmd_pipeline,
}


def _add_shape_flags(p: argparse.ArgumentParser, problem_required: bool) -> None:
    p.add_argument("problem", type=Path, nargs=None if problem_required else "?", help="problem file")
    p.add_argument("--pencil", type=Path, dest="pencil_path",
                   help="pencil file; with a problem file its matrices become the parameter basis")
    p.add_argument("--block", action="append", default=[], dest="blocks", metavar="SPEC",
                   help="shape override, e.g. '{1}:1,a,b' (repeatable, in block order)")
    p.add_argument("--degree-cap", type=int, default=4)
    p.add_argument("--product-cap", type=int, default=4096)
    p.add_argument("--slice", action="append", default=[], dest="slices", metavar="EQ",
                   help="affine relation over a1..am, e.g. '-9*a1+a2=-10' (repeatable)")
    p.add_argument("--emit-pencil", type=Path)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--max-den", type=int, default=10**6)
    p.add_argument("--emit-cert", type=Path)
    p.add_argument("--report-dir", type=Path, help="write trace/spectrum CSV files and PNG figures here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psatz", description="Search and check Positivstellensatz certificates.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("assemble", help="build the certificate pencil for a problem")
    _add_shape_flags(p, problem_required=False)
    p = sub.add_parser("solve", help="numerically search a pencil, then rationalize and verify")
    _add_shape_flags(p, problem_required=False)
    _add_solver_flags(p)
    p = sub.add_parser("probe", help="exact determinant and gradient at a parameter point")
    _add_shape_flags(p, problem_required=False)
    p.add_argument("--point", required=True, help="e.g. '5,-7' or 'a1=5,a2=-7'")
    p = sub.add_parser("verify", help="check a certificate file exactly")
    p.add_argument("problem", type=Path)
    p.add_argument("certificate", type=Path)
    p = sub.add_parser("pipeline", help="assemble, solve, rationalize and verify; probe on failure")
    _add_shape_flags(p, problem_required=True)
    _add_solver_flags(p)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for name in ("problem", "certificate"):
        if getattr(ns, name, None) is not None:
            setattr(cfg, f"{name}_path", getattr(ns, name))
    for name in ("pencil_path", "blocks", "degree_cap", "product_cap", "slices", "point", "tol",
                 "max_iter", "max_den", "emit_pencil", "emit_cert", "report_dir"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


_VALUE_FLAGS = ("--slice", "--point")


def _glue_values(argv: Sequence[str]) -> list[str]:
    """``--slice -9*a1+a2=-10`` -> ``--slice=-9*a1+a2=-10`` so argparse does not
    mistake a leading minus for an option."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    argv = _glue_values(sys.argv[1:] if argv is None else argv)
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    cfg = config_from_args(ns)
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoCertificateOfShape as exc:
        print(str(exc), file=out)
        return EXIT_SHAPE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
