"""Command-line front end.

Exit status: 0 on success, 1 when the answer is "no" or the budget ran out,
2 on usage errors. Output is JSON by default (JSON lines for streams).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import problems
from .encoding import (INVALID, bits_to_hex, decode, encode, enumerate_machines, godel_index,
                       hex_to_bits, index_to_code, is_trivial_fill)
from .machine import (Dialect, Halted, MachineError, OracleSpec, emit_program,
                      finite_set_oracle, parse_program, run_bounded, trace)
from .priority import PriorityConstruction, load_synthetic
from .reals import RealValue, format_value, parse_value, parse_values
from .simulation import enumerate_halting_pairs


class UsageError(Exception):
    pass


def _read_program(path: str):
    text = sys.stdin.read() if path == "-" else open(path).read()
    return parse_program(text)


def _oracle(name):
    if name is None:
        return None
    if name == "empty":
        return OracleSpec("empty", lambda q: False)
    if name == "naturals":
        return OracleSpec("naturals", lambda q: len(q) == 1 and q[0].is_integer() and q[0].constant >= 0)
    if name == "rationals":
        return OracleSpec("rationals", lambda q: len(q) == 1 and q[0].is_rational())
    if name.startswith("sqrt-primes:"):
        return problems.sqrt_primes_oracle(int(name.split(":", 1)[1]))
    try:
        with open(name) as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    except OSError:
        raise UsageError(f"unknown oracle {name!r}") from None
    return finite_set_oracle([parse_values(ln) for ln in lines], name=name)


def _fmt_q(q):
    if isinstance(q, Fraction):
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    if isinstance(q, RealValue):
        return format_value(q)
    return str(q)


def _emit(args, obj, text=None):
    if args.format == "text" and text is not None:
        print(text)
    else:
        print(json.dumps(obj))


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args):
    p = _read_program(args.program)
    res = run_bounded(p, parse_values(args.input), _oracle(args.oracle), args.steps)
    if isinstance(res, Halted):
        out = [format_value(v) for v in res.output]
        _emit(args, {"halted": True, "output": out, "halted_at": res.halted_at},
              f"halted at {res.halted_at}: ({', '.join(out)})")
        return 0
    _emit(args, {"halted": False, "steps": args.steps}, f"no halt within {args.steps} steps")
    return 1


def cmd_trace(args):
    p = _read_program(args.program)
    halted = False
    for rec in trace(p, parse_values(args.input), _oracle(args.oracle), args.steps):
        halted = "output" in rec
        if args.format == "text":
            cell = f"  {rec['changed_cell']} := {rec['value']}" if rec["changed_cell"] else ""
            print(f"{rec['step']:>6} {rec['label']:>4}: {rec['instr']}{cell}")
        else:
            print(json.dumps(rec))
    return 0 if halted else 1


def cmd_encode(args):
    p = _read_program(args.program)
    bits = encode(p)
    _emit(args, {"bits": bits, "hex": bits_to_hex(bits), "length": len(bits)}, bits)
    return 0


def cmd_decode(args):
    text = args.code.strip()
    bits = hex_to_bits(text) if text.startswith("0x") else text
    p = decode(bits)
    if p is INVALID:
        _emit(args, {"valid": False}, "invalid")
        return 1
    src = emit_program(p)
    _emit(args, {"valid": True, "program": src}, src.rstrip("\n"))
    return 0


def cmd_index(args):
    if args.program is not None:
        k = godel_index(_read_program(args.program))
        _emit(args, {"index": k}, str(k))
        return 0
    if args.of is None:
        raise UsageError("index needs a program file or --of K")
    bits = index_to_code(args.of)
    p = decode(bits)
    if p is INVALID:
        _emit(args, {"index": args.of, "valid": False}, "invalid")
        return 1
    src = emit_program(p)
    _emit(args, {"index": args.of, "valid": True, "program": src}, src.rstrip("\n"))
    return 0


def cmd_enumerate(args):
    d = Dialect.from_name(args.dialect)
    for k, p in enumerate_machines(d, args.count, args.with_oracle):
        trivial = is_trivial_fill(k, d, args.with_oracle)
        if args.valid_only and trivial:
            continue
        if args.format == "text":
            print(f"{k}: {'trivial' if trivial else emit_program(p).strip().replace(chr(10), ' / ')}")
        else:
            print(json.dumps({"index": k, "trivial": trivial, "program": emit_program(p)}))
    return 0


def cmd_halting_pairs(args):
    p = _read_program(args.program)
    pairs = enumerate_halting_pairs(p, args.budget)
    print("i,n,t")
    for i, hp in enumerate(pairs, start=1):
        print(f"{i},{hp.n},{hp.t}")
    return 0


def cmd_stages(args):
    if args.synthetic:
        enums, machines = load_synthetic(args.synthetic)
        c = PriorityConstruction(enums, machines)
    else:
        c = PriorityConstruction()
    final, _ = c.run(args.max)
    for rec in c.stage_log:
        print(json.dumps(rec))
    print(json.dumps({"A": sorted(final.A)}))
    return 0


def _verdict(args, member, witness, used, extra=None):
    obj = {"verdict": "yes" if member else "no", "witness": witness, "steps": used}
    if extra:
        obj.update(extra)
    _emit(args, obj, f"{obj['verdict']} witness={witness} steps={used}")
    return 0 if member else 1


def cmd_problem(args):
    pts = parse_values(args.point) if args.point else ()
    if args.which == "l_n":
        if args.exact:
            v = problems.l_n_decide(pts)
        else:
            v = problems.l_n_semidecide(pts, args.budget)
        w = [_fmt_q(q) for q in v.witness] if v.witness else None
        return _verdict(args, v.member, w, v.used)
    if args.which == "kappa":
        if len(pts) != 1 or args.i is None:
            raise UsageError("kappa needs -i and a single-value --point")
        v = problems.kappa_semidecide(args.i, pts[0], args.budget)
        return _verdict(args, v.halted, list(v.pair) if v.pair else None, v.used)
    if args.which == "p_i":
        if args.i is None:
            raise UsageError("p_i needs -i")
        if len(pts) == 1:
            pts = problems.p_point(args.i, pts[0])
        return _verdict(args, problems.p_i_member(pts, args.i), None, 0)
    if args.which == "h_i":
        if args.i is None:
            raise UsageError("h_i needs -i")
        v = problems.h_i_semidecide(pts, args.i, args.budget)
        return _verdict(args, v.halted, v.via, v.used)
    if args.which == "select":
        if args.i is None or args.k is None or len(pts) != 1:
            raise UsageError("select needs -i, -k and a single-value --point")
        try:
            out = problems.sqrt_select_decide(args.k, pts[0], args.i)
        except problems.PreconditionViolated as e:
            raise UsageError(str(e)) from None
        return _verdict(args, out == 1, out, 0)
    raise UsageError(f"unknown problem {args.which!r}")


def cmd_shadow(args):
    p = _read_program(args.program)
    target = parse_value(args.target)
    oracle = _oracle(args.oracle)
    q = problems.rational_shadow_search(p, target, args.steps, args.denominator_bound, oracle)
    system = problems.extract_path_constraints(p, target, args.steps, oracle)
    atoms = [str(a) for a in system.atoms]
    if q is None:
        _emit(args, {"shadow": None, "atoms": atoms}, "no shadow")
        return 1
    same = problems.same_path(p, q, system, oracle)
    _emit(args, {"shadow": _fmt_q(q), "atoms": atoms, "same_path": same}, _fmt_q(q))
    return 0


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bssram", description="Additive real machines with oracles.")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, steps=True):
        sp.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
        if steps:
            sp.add_argument("--steps", type=int, default=1000)

    sp = sub.add_parser("run", help="run a program")
    sp.add_argument("program")
    sp.add_argument("--input", required=True)
    sp.add_argument("--oracle")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("trace", help="step trace as JSON lines")
    sp.add_argument("program")
    sp.add_argument("--input", required=True)
    sp.add_argument("--oracle")
    common(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("encode", help="bit code of a program")
    sp.add_argument("program")
    common(sp, steps=False)
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("decode", help="program from a bit code (or 0x hex index)")
    sp.add_argument("code")
    common(sp, steps=False)
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("index", help="index of a program, or program at --of K")
    sp.add_argument("program", nargs="?")
    sp.add_argument("--of", type=int)
    common(sp, steps=False)
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("enumerate", help="list the first machines of a class")
    sp.add_argument("--dialect", default="add1")
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--with-oracle", action="store_true")
    sp.add_argument("--valid-only", action="store_true")
    common(sp, steps=False)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("halting-pairs", help="dovetailed halting pairs as CSV")
    sp.add_argument("program")
    sp.add_argument("--budget", type=int, default=100)
    common(sp, steps=False)
    sp.set_defaults(func=cmd_halting_pairs)

    sp = sub.add_parser("stages", help="priority construction log")
    sp.add_argument("--max", type=int, required=True)
    sp.add_argument("--synthetic")
    common(sp, steps=False)
    sp.set_defaults(func=cmd_stages)

    sp = sub.add_parser("problem", help="decision problems")
    sp.add_argument("which", choices=("l_n", "kappa", "p_i", "h_i", "select"))
    sp.add_argument("--point", "--input", dest="point", default="")
    sp.add_argument("-i", type=int)
    sp.add_argument("-k", type=int)
    sp.add_argument("--budget", type=int, default=100000)
    sp.add_argument("--exact", action="store_true", help="l_n: exact decision instead of search")
    common(sp, steps=False)
    sp.set_defaults(func=cmd_problem)

    sp = sub.add_parser("shadow", help="rational input following the target's path")
    sp.add_argument("program")
    sp.add_argument("--target", required=True)
    sp.add_argument("--denominator-bound", type=int, default=1000)
    sp.add_argument("--oracle")
    common(sp)
    sp.set_defaults(func=cmd_shadow)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MachineError, ValueError, OSError) as e:
        print(f"bssram: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
