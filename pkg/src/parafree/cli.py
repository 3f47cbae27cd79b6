"""Command line interface.

Reports go to standard output as canonical JSON; diagnostics go to standard
error as JSON. Exit status: 0 for any computed answer (including "unknown"),
1 for input errors, 2 for internal invariant violations.
"""

import argparse
import sys

from . import __version__
from .criteria import check_gog
from .errors import InvariantViolation, ParafreeError
from .io import dumps, parse_instance
from .nilpotent import NilWitness, SearchBounds, search_witness, verify_witness
from .normal_form import format_mixed, is_nontrivial, parse_mixed, reduce_in
from .graph import expected_rank


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_bounds(p):
    d = SearchBounds()
    p.add_argument("--dims", type=_int_list, default=d.dims, help="UT dimensions, e.g. 3,4")
    p.add_argument("--primes", type=_int_list, default=d.primes, help="primes, e.g. 2,3,5")
    p.add_argument("--cap", type=int, default=d.exhaustive_cap, help="exhaustive tuple cap")
    p.add_argument("--samples", type=int, default=d.sample_count, help="random samples after cap")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--workers", type=int, default=1, help="parallel search processes")


def _bounds(args) -> SearchBounds:
    return SearchBounds(args.dims, args.primes, args.cap, args.samples, args.seed)


def build_parser():
    parser = _Parser(prog="parafree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide parafreeness of an instance")
    p.add_argument("file")
    p.add_argument("--generic", action="store_true",
                   help="disable the exact rank-2 HNN shortcut")
    _add_bounds(p)

    p = sub.add_parser("abelianization", help="invariants of the abelianization")
    p.add_argument("file")

    p = sub.add_parser("witness", help="search a nilpotent quotient where an edge word survives")
    p.add_argument("file")
    p.add_argument("--edge", required=True)
    _add_bounds(p)

    p = sub.add_parser("normal-form", help="reduce a mixed word (at most one edge)")
    p.add_argument("file")
    p.add_argument("--word", required=True)
    return parser


def _load(path):
    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def cmd_check(args):
    g = _load(args.file)
    bounds = _bounds(args)
    v = check_gog(g, bounds, fast_path=not args.generic, workers=args.workers)
    return {**v.to_json(), "bounds_used": bounds.to_json()}


def cmd_abelianization(args):
    g = _load(args.file)
    ab = g.abelianization
    return {
        "free_rank": ab.free_rank,
        "torsion": list(ab.torsion),
        "expected_rank": expected_rank(g),
        "stable_letters": list(ab.stable_letters),
        "generators": list(g.presentation.generators[:ab.vertex_rank]),
        "relation_matrix": ab.relations.to_rows(),
    }


def cmd_witness(args):
    g = _load(args.file)
    bounds = _bounds(args)
    found = search_witness(g, args.edge, bounds, args.workers)
    out = {"edge": args.edge, "bounds_used": bounds.to_json()}
    if isinstance(found, NilWitness):
        if not verify_witness(g, found):
            raise InvariantViolation("witness failed independent verification")
        out.update(result="witness", verified=True, witness=found.to_json())
    else:
        out.update(result="no_witness_up_to_bound", explored=found.to_json()["explored"])
    return out


def cmd_normal_form(args):
    g = _load(args.file)
    mw = parse_mixed(g, args.word)
    det = is_nontrivial(g, mw)
    nf = reduce_in(g, mw)
    stable = g.edges[0].id if len(g.edges) == 1 else "t"
    return {
        "word": args.word,
        "normal_form": None if nf is None else format_mixed(g, nf.word, stable),
        "trivial": None if nf is None else nf.trivial,
        "nontrivial": det.value.value,
    }


COMMANDS = {"check": cmd_check, "abelianization": cmd_abelianization,
            "witness": cmd_witness, "normal-form": cmd_normal_form}


def _diag(kind, exc, **extra):
    info = {"error": kind, "message": str(exc)}
    for attr in ("path", "position", "offset"):
        if getattr(exc, attr, None) is not None:
            info[attr] = getattr(exc, attr)
    info.update(extra)
    sys.stderr.write(dumps(info))


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        report = COMMANDS[args.command](args)
    except UsageError as exc:
        _diag("UsageError", exc)
        return 1
    except (ParafreeError, OSError) as exc:
        _diag(type(exc).__name__, exc)
        return 1
    except InvariantViolation as exc:
        _diag("InvariantViolation", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - any crash is an internal failure
        _diag("InternalError", exc, type=type(exc).__name__)
        return 2
    report["tool_version"] = __version__
    stdout.write(dumps(report))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
