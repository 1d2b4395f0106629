"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a verification failure (or an
unsolvable system), 2 on malformed input.
"""

from __future__ import annotations

import json
import os
import sys
from itertools import product as iproduct
from pathlib import Path

import click

from . import __version__
from .algebra import PRESETS, ModuleRep, free_module, preset
from .braiding import TAG_TENSOR, tensor_connection, verify_braiding, verify_theorem_24
from .connection import (
    TAG_ACT,
    TAG_FLAT,
    Connection,
    check_connection,
    flatness,
    random_flat_connection,
    solve_connections,
    verify_lemma_21,
)
from .dga import idempotent_catalog, verify_example
from .errors import (
    DegreeCapExceeded,
    ModuleAxiomError,
    NcflatError,
    NotAssociative,
    NotUnital,
    UnknownPreset,
    WellDefinednessFailure,
)
from .exactlin import GF, QQ
from .homconn import (
    TAG_HOMFLAT,
    HomConnection,
    check_hom_connection,
    dual_hom_connection,
    expected_h1_dim,
    hom_context,
    solve_hom_connections,
    sweep_flat,
    verify_hom_identities,
    verify_phi_identities,
    verify_prop_31,
    verify_symbol,
)
from .report import FAIL, PASS, Check, VerificationReport, witness_from_diff
from .serialize import (
    InstanceError,
    Instance,
    build_document,
    digest,
    dumps,
    instance_from_json,
    instance_json,
    load_document,
)

SUITES = ("connection", "lemma21", "braid", "thm24", "tensor", "dga", "hom")

AXIOM_ERRORS = (NotAssociative, NotUnital, ModuleAxiomError)


class InputError(click.ClickException):
    exit_code = 2


def _load(path: str) -> tuple[dict, Instance]:
    try:
        doc = load_document(path)
        return doc, instance_from_json(doc)
    except InstanceError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except UnknownPreset as exc:
        raise InputError(f"{path}: algebra: {exc.args[0]}") from exc


def _apply_options(inst: Instance) -> None:
    # the environment variable wins over the file
    cap = inst.options.get("degree_cap")
    if cap is not None and not os.environ.get("NCFLAT_DEGREE_CAP"):
        os.environ["NCFLAT_DEGREE_CAP"] = str(int(cap))


def _axiom_witness(exc: Exception) -> dict:
    if isinstance(exc, NotAssociative):
        return {"triple": list(exc.triple)}
    if isinstance(exc, NotUnital):
        return {"basis": exc.index, "side": exc.side}
    return {"axiom": exc.axiom, "indices": list(exc.witness)}


def _envelope(report: VerificationReport, doc: dict, **extra) -> dict:
    out = {"tool": "ncflat", "version": __version__, "input_digest": digest(doc)}
    out.update(extra)
    out.update(report.as_dict())
    return out


def _emit(report: VerificationReport, doc: dict, json_path: str | None, quiet: bool = False, **extra) -> None:
    if json_path:
        Path(json_path).write_text(dumps(_envelope(report, doc, **extra)))
    if quiet:
        return
    for c in report.checks:
        if c.status == FAIL:
            w = f" witness={json.dumps(c.witness, sort_keys=True)}" if c.witness else ""
            click.echo(f"FAIL {c.id} [{c.tag}]{w}")
    s = report.summary()
    click.echo(f"{s[PASS]} passed, {s[FAIL]} failed, {s['skipped']} skipped")


def _finish(report: VerificationReport) -> None:
    sys.exit(0 if report.passed else 1)


# -- suites ------------------------------------------------------------------------------------

def _connections(inst: Instance) -> dict[str, Connection]:
    return {k: Connection(inst.module(m), mat, name=k) for k, (m, mat) in inst.connections.items()}


def _flat_ones(conns: dict[str, Connection]) -> dict[str, Connection]:
    return {k: c for k, c in conns.items() if check_connection(c).passed and c.is_flat()}


def _flat_witness(fl):
    return witness_from_diff(fl.residuals)


def suite_connection(inst: Instance) -> VerificationReport:
    rep = VerificationReport()
    for name, conn in _connections(inst).items():
        p = f"[{name}] "
        rep.extend(check_connection(conn), p)
        fl = flatness(conn, require_connection=False)
        rep.add(Check(p + "flat", TAG_FLAT, PASS if fl.is_flat else FAIL, _flat_witness(fl)))
    return rep


def suite_lemma21(inst: Instance) -> VerificationReport:
    rep = VerificationReport()
    for name, conn in _connections(inst).items():
        rep.extend(verify_lemma_21(conn), f"[{name}] ")
    return rep


def _skip_nonflat(rep: VerificationReport, conns: dict, flat: dict, id: str, tag: str) -> None:
    for name in conns:
        if name not in flat:
            rep.skip(f"[{name}] {id}", tag, "connection is not flat")


def suite_braid(inst: Instance) -> VerificationReport:
    rep = VerificationReport()
    conns = _connections(inst)
    flat = _flat_ones(conns)
    _skip_nonflat(rep, conns, flat, "braid", "braid")
    names = sorted(flat)
    for i, a in enumerate(names):
        for b in names[i:]:
            rep.extend(verify_braiding(flat[a], flat[b]), f"[{a},{b}] ")
    return rep


def suite_thm24(inst: Instance) -> VerificationReport:
    rep = VerificationReport()
    conns = _connections(inst)
    flat = _flat_ones(conns)
    _skip_nonflat(rep, conns, flat, "thm24", "sigma")
    for name in sorted(flat):
        rep.extend(verify_theorem_24(flat[name]), f"[{name}] ")
    return rep


def suite_tensor(inst: Instance) -> VerificationReport:
    """``M (x)_A N`` for flat ``M`` and every declared ``N``; flat (x) flat must be flat."""
    rep = VerificationReport()
    conns = _connections(inst)
    flat = _flat_ones(conns)
    for a, b in iproduct(sorted(flat), sorted(conns)):
        p = f"[{a}(x){b}] "
        try:
            t = tensor_connection(flat[a], conns[b])
        except WellDefinednessFailure as exc:
            rep.add(Check(p + "well_defined", TAG_TENSOR, FAIL, exc.witness))
            continue
        rep.add(Check(p + "well_defined", TAG_TENSOR, PASS))
        rep.extend(check_connection(t), p)
        if b in flat:
            fl = flatness(t, require_connection=False)
            rep.add(Check(p + "flat", TAG_FLAT, PASS if fl.is_flat else FAIL, _flat_witness(fl)))
    return rep


def suite_dga(inst: Instance) -> VerificationReport:
    return verify_example(inst.algebra)


def _hom_checks(rep: VerificationReport, nab: HomConnection, p: str) -> None:
    rep.extend(check_hom_connection(nab), p)
    rep.extend(verify_hom_identities(nab), p)
    if nab.is_flat():
        rep.extend(verify_prop_31(nab), p)
        rep.extend(verify_symbol(nab), p)
    else:
        rep.skip(p + "prop31", TAG_ACT, "hom-connection is not flat")


def suite_hom(inst: Instance) -> VerificationReport:
    """Declared hom-connections, or else duals of the declared connections."""
    rep = VerificationReport()
    contexts = {}

    def ctx_for(M: ModuleRep):
        if M.name not in contexts:
            ctx = hom_context(M)
            contexts[M.name] = ctx
            p = f"[{M.name}] "
            found, want = ctx.h1.dim, expected_h1_dim(M)
            rep.add(Check(p + "dim H^1", "hom-con", PASS if found == want else FAIL, None if found == want else {"found": found, "expected": want}))
            rep.extend(verify_phi_identities(ctx), p)
        return contexts[M.name]

    if inst.hom_connections:
        for name, (mname, mat) in inst.hom_connections.items():
            M = inst.module(mname, f"hom_connections.{name}.module")
            if M.right is None:
                raise InstanceError(f"hom_connections.{name}.module", f"module {mname!r} has no right action")
            ctx = ctx_for(M)
            if mat.shape != (M.dim, ctx.h1.dim):
                raise InstanceError(
                    f"hom_connections.{name}.matrix", f"expected shape {[M.dim, ctx.h1.dim]}, got {list(mat.shape)}"
                )
            _hom_checks(rep, HomConnection(ctx, mat, name=name), f"[{name}] ")
    else:
        for name, conn in _connections(inst).items():
            if not check_connection(conn).passed:
                rep.skip(f"[dual {name}] hom", TAG_HOMFLAT, "not a connection")
                continue
            dual = ModuleRep(conn.algebra, conn.module.dim, None, tuple(L.T for L in conn.module.left), f"{name}*")
            nab = dual_hom_connection(conn, ctx_for(dual))
            _hom_checks(rep, nab, f"[dual {name}] ")
    return rep


SUITE_FUNCS = {
    "connection": suite_connection,
    "lemma21": suite_lemma21,
    "braid": suite_braid,
    "thm24": suite_thm24,
    "tensor": suite_tensor,
    "dga": suite_dga,
    "hom": suite_hom,
}


def run_suite(inst: Instance, suite: str) -> VerificationReport:
    if suite != "all":
        return SUITE_FUNCS[suite](inst)
    rep = VerificationReport()
    for name in SUITES:
        rep.extend(SUITE_FUNCS[name](inst), f"{name}: ")
    return rep


# -- commands ---------------------------------------------------------------------------------------

@click.group()
@click.version_option(__version__, prog_name="ncflat")
def main():
    """Exact checks for connections over the universal differential calculus."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write the JSON report here.")
def validate(file, json_path):
    """Check the algebra and module axioms of an instance file."""
    try:
        doc = load_document(file)
    except InstanceError as exc:
        raise InputError(f"{file}: {exc}") from exc
    rep = VerificationReport()
    try:
        inst = instance_from_json(doc)
    except AXIOM_ERRORS as exc:
        rep.add(Check("axioms", "algebra", FAIL, _axiom_witness(exc), str(exc)))
        _emit(rep, doc, json_path)
        _finish(rep)
    except InstanceError as exc:
        raise InputError(f"{file}: {exc}") from exc
    except UnknownPreset as exc:
        raise InputError(f"{file}: algebra: {exc.args[0]}") from exc
    rep.add(Check("algebra", "algebra", PASS, detail=f"{inst.algebra.name}, dim {inst.algebra.dim}"))
    for name in inst.modules:
        rep.add(Check(f"module[{name}]", "module", PASS))
    _emit(rep, doc, json_path)
    _finish(rep)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--suite", type=click.Choice(SUITES + ("all",)), default="all", show_default=True)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write the JSON report here.")
def verify(file, suite, json_path):
    """Run a verification suite on the objects declared in FILE."""
    try:
        doc = load_document(file)
    except InstanceError as exc:
        raise InputError(f"{file}: {exc}") from exc
    try:
        inst = instance_from_json(doc)
    except AXIOM_ERRORS as exc:
        rep = VerificationReport([Check("axioms", "algebra", FAIL, _axiom_witness(exc), str(exc))])
        _emit(rep, doc, json_path, suite=suite)
        _finish(rep)
    except (InstanceError, UnknownPreset) as exc:
        raise InputError(f"{file}: {exc}") from exc
    _apply_options(inst)
    try:
        rep = run_suite(inst, suite)
    except (InstanceError, DegreeCapExceeded) as exc:
        raise InputError(f"{file}: {exc}") from exc
    _emit(rep, doc, json_path, suite=suite)
    _finish(rep)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", type=click.Choice(["connection", "homconnection"]), required=True)
@click.option("--module", "module_name", required=True, help="Name of a module declared in FILE.")
@click.option("--name", "out_name", default=None, help="Name for the solution in the output file.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write FILE plus the particular solution here.")
def solve(file, target, module_name, out_name, output):
    """Solve the affine system for (hom-)connections on a module."""
    doc, inst = _load(file)
    try:
        M = inst.module(module_name, "--module")
    except InstanceError as exc:
        raise InputError(str(exc)) from exc
    if target == "connection":
        if M.left is None:
            raise InputError(f"module {module_name!r} has no left action")
        fam = solve_connections(M)
    else:
        if M.right is None:
            raise InputError(f"module {module_name!r} has no right action")
        fam = solve_hom_connections(M)
    if fam is None:
        click.echo("inconsistent")
        sys.exit(1)
    click.echo(f"family dimension {fam.dimension}")
    key = out_name or f"solved_{module_name}"
    if target == "connection":
        inst.connections[key] = (module_name, fam.particular.matrix)
    else:
        inst.hom_connections[key] = (module_name, fam.particular.matrix)
    text = dumps(instance_json(inst))
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _field(prime: int | None):
    if prime is None:
        return QQ
    try:
        return GF(prime)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--prime") from exc


@main.command()
@click.option("--algebra", "alg", type=click.Choice(sorted(PRESETS)), required=True)
@click.option("--vdim", type=click.IntRange(min=1), required=True, help="Rank of the free module A (x) K^vdim.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--prime", type=int, default=None, help="Work over GF(prime) instead of QQ.")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def random(alg, vdim, seed, prime, output):
    """Emit an instance with a seeded random flat connection."""
    A = preset(alg, _field(prime))
    M, conn = random_flat_connection(A, vdim, seed)
    M = free_module(A, vdim, "M")
    doc = build_document(A, {"M": M}, {"nabla": ("M", conn.matrix)}, options={"seed": seed})
    text = dumps(doc)
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--algebra", "alg", type=click.Choice(sorted(PRESETS)), required=True)
@click.option("--idempotent", "idem", default=None, help="Restrict to one catalogued idempotent.")
@click.option("--prime", type=int, default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False))
def dga(alg, idem, prime, json_path):
    """Check the example differential graded algebra on a preset."""
    A = preset(alg, _field(prime))
    cat = idempotent_catalog(A)
    if idem is not None:
        if idem not in cat:
            raise InputError(f"unknown idempotent {idem!r}; catalogued: {', '.join(cat)}")
        cat = {idem: cat[idem]}
    try:
        rep = verify_example(A, cat)
    except DegreeCapExceeded as exc:
        raise InputError(str(exc)) from exc
    doc = {"command": "dga", "algebra": alg, "idempotent": idem, "field": str(A.field)}
    _emit(rep, doc, json_path, suite="dga")
    _finish(rep)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--module", "module_name", required=True)
@click.option("--budget", type=click.IntRange(min=1), default=None, help="Family members to try (default: options.budget or 200).")
@click.option("--seed", type=int, default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False))
def hom(file, module_name, budget, seed, json_path):
    """Sweep the hom-connection family of a right module for flat members."""
    doc, inst = _load(file)
    try:
        M = inst.module(module_name, "--module")
    except InstanceError as exc:
        raise InputError(str(exc)) from exc
    if M.right is None:
        raise InputError(f"module {module_name!r} has no right action")
    budget = budget if budget is not None else int(inst.options.get("budget", 200))
    seed = seed if seed is not None else int(inst.options.get("seed", 0))
    res = sweep_flat(M, budget=budget, seed=seed)
    rep = VerificationReport()
    if res.family_dimension is None:
        click.echo("inconsistent")
        sys.exit(1)
    click.echo(f"family dimension {res.family_dimension}, tried {res.tried}, flat {len(res.flat)}")
    if not res.flat:
        rep.skip("flat witness", TAG_HOMFLAT, f"no flat hom-connection among {res.tried} family members")
    for i, nab in enumerate(res.flat):
        _hom_checks(rep, nab, f"[flat {i}] ")
    _emit(rep, doc, json_path, suite="hom", budget=budget, seed=seed)
    _finish(rep)


def run(argv=None) -> int:
    """Invoke the CLI in-process and return its exit code."""
    try:
        main.main(args=argv, prog_name="ncflat", standalone_mode=False)
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except NcflatError as exc:
        click.echo(f"Error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    main()
