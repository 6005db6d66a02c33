"""Command-line front end.

Subcommands: patterns, closure, quotient, membership, nucleus, check-group.
Output is deterministic JSON by default; --format text renders readable
reports, --format dot exports machine graphs where a machine is the payload.
Exit codes: 0 ok, 1 invalid input, 2 resource cap, 3 verification failure.
"""

import argparse
import json
import os
import sys

from treegrp import closure as closure_mod
from treegrp import constrained, families, machines, patterns, permgroup
from treegrp.errors import CapExceeded
from treegrp.trees import parse_vertex, vertex_str

DEFAULT_CAP = constrained.DEFAULT_ELEMENT_CAP


class VerificationFailure(Exception):
    pass


def _cap_elements(args):
    if args.cap_elements is not None:
        return args.cap_elements
    env = os.environ.get("TREEGRP_CAP_ELEMENTS")
    if env:
        return int(env)
    return DEFAULT_CAP


def _load_inputs(args, need_constraints=False, depth_hint=None):
    """Resolve --family / --group / --constraints into (family, constraints)."""
    fam = None
    cons = None
    if args.family:
        depth = max(depth_hint or 0, getattr(args, "depth", 0) or 0) or None
        if depth is not None:
            depth = min(max(depth + 1, 4), families.MAX_TOWER_DEPTH)
            fam = families.family_from_name(args.family, depth)
        else:
            fam = families.family_from_name(args.family)
        cons = fam.constraints
    if getattr(args, "group", None):
        machine, gens = machines.load_machine(args.group)
        fam = families.FamilySpec(
            name=os.path.basename(args.group),
            k=machine.k,
            machine=machine,
            generators=gens,
            closure_gen_names=tuple(sorted(gens)),
        )
    if getattr(args, "constraints", None):
        with open(args.constraints) as fh:
            cons = constrained.ConstraintSystem.from_json(json.load(fh))
    if fam is None:
        raise ValueError("give --family or --group")
    if need_constraints and cons is None:
        raise ValueError("this command needs --constraints or a constrained family")
    return fam, cons


def _emit(args, report, dot=None):
    if args.format == "dot":
        if dot is None:
            raise ValueError("dot output is not available for this command")
        text = dot
    elif args.format == "text":
        text = _render_text(report)
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render_text(report, indent=0):
    lines = []
    pad = "  " * indent
    for key in sorted(report):
        val = report[key]
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_render_text(val, indent + 1))
        elif isinstance(val, list):
            lines.append(f"{pad}{key}: {json.dumps(val)}")
        else:
            lines.append(f"{pad}{key}: {val}")
    return "\n".join(lines) + ("\n" if indent == 0 else "")


def cmd_patterns(args):
    fam, _ = _load_inputs(args)
    size = args.size
    if size is None:
        size = fam.closure_size
    if size is None:
        raise ValueError("give --size")
    gens = fam.closure_generators() or list(fam.generators.values())
    ps = patterns.essential_patterns(gens, size, _cap_elements(args))
    report = {
        "command": "patterns",
        "family": fam.name,
        "size": size,
        "count": len(ps),
        "is_group": patterns.is_pattern_group(ps),
        "is_transitive": patterns.is_transitive(ps),
    }
    if args.list:
        report["patterns"] = ps.to_json()
    _emit(args, report)
    return 0


def cmd_closure(args):
    depth = args.depth
    fam, cons = _load_inputs(args, depth_hint=depth)
    size = args.size or fam.closure_size
    if size is None:
        raise ValueError("give --size")
    gens = fam.closure_generators() or list(fam.generators.values())
    cap = _cap_elements(args)
    pres = closure_mod.pattern_closure(
        gens,
        size,
        contracting=args.contracting,
        element_cap=cap,
        state_cap=args.cap_states,
        nucleus_max_iter=args.max_iter,
    )
    if cons is None or cons.size != size:
        cons = constrained.ConstraintSystem(fam.k, size, allowed=pres.allowed.members)
    verified = {}
    orders = {}
    for n in range(size, depth + 1):
        lps = constrained.truncation_leaf_perms(cons, n, cap)
        orders[str(n)] = len(lps)
        verified[str(n)] = closure_mod.verify_closure(pres, cons, n, cap)
    branching_ok = closure_mod.verify_branching(pres, min(depth, size + 2), seed=0, cap=cap)
    report = {
        "command": "closure",
        "family": fam.name,
        "size": size,
        "level_stabilizer": pres.level,
        "base_count": len(pres.base),
        "stabilizer_generator_count": len(pres.stab_gens),
        "allowed_count": len(pres.allowed),
        "quotient_orders": orders,
        "verified": verified,
        "branching_ok": branching_ok,
        "presentation": pres.to_json(),
    }
    if pres.nucleus is not None:
        report["nucleus_size"] = len(pres.nucleus)
    _emit(args, report, dot=pres.machine.to_dot())
    if not all(verified.values()) or not branching_ok:
        raise VerificationFailure("closure verification failed")
    return 0


def cmd_quotient(args):
    fam, _ = _load_inputs(args, depth_hint=args.level)
    n = args.level
    cap = _cap_elements(args)
    names = _candidate_names(fam, n)
    cands = [permgroup.level_perm(fam.generators[nm], n) for nm in names]
    G = permgroup.PermGroup(fam.k, n, cands)
    lower, upper = permgroup.min_generators_bounds(G, cands, cap)
    report = {
        "command": "quotient",
        "family": fam.name,
        "level": n,
        "order": permgroup.order(G, cap),
        "d_lower": lower,
        "d_upper": upper,
        "abelianization": permgroup.abelianization_invariants(G, cap),
        "candidates": list(names),
    }
    _emit(args, report)
    return 0


def _candidate_names(fam, n):
    if fam.tower_level is not None:
        s = fam.tower_level
        names = ["t"] + [f"t_{m}" for m in range(s + 1, n)]
    elif fam.name == "gB":
        names = ["a"] + [f"a_{m}" for m in range(1, n)]
    else:
        names = sorted(fam.generators)
    missing = [nm for nm in names if nm not in fam.generators]
    if missing:
        raise ValueError(f"family lacks generators {missing}; reduce --level")
    return names


def cmd_membership(args):
    fam, cons = _load_inputs(args, need_constraints=True)
    g = fam.element(args.element)
    witness = constrained.membership_violation(g, cons, args.cap_states)
    report = {
        "command": "membership",
        "family": fam.name,
        "element": args.element,
        "member": witness is None,
        "violation": None if witness is None else vertex_str(witness),
    }
    _emit(args, report)
    return 0


def cmd_nucleus(args):
    fam, _ = _load_inputs(args)
    gens = fam.closure_generators() or list(fam.generators.values())
    nuc = closure_mod.nucleus(
        gens, max_iter=args.max_iter, cap=args.cap_elements or 4096,
        state_cap=args.cap_states,
    )
    report = {
        "command": "nucleus",
        "family": fam.name,
        "size": len(nuc),
        "elements": [repr(e) for e in nuc],
    }
    _emit(args, report, dot=fam.machine.to_dot())
    return 0


def cmd_check_group(args):
    fam, cons = _load_inputs(args, need_constraints=True)
    viable = constrained.viable_patterns(cons)
    report = {
        "command": "check-group",
        "family": fam.name,
        "is_group": patterns.is_pattern_group(viable),
        "viable_count": len(viable),
    }
    _emit(args, report)
    return 0


def _add_common(sub):
    sub.add_argument("--family", help="odometer:k=K,s=S | gB | gR | trivial3 | grigorchuk")
    sub.add_argument("--group", help="machine JSON file")
    sub.add_argument("--constraints", help="constraint system JSON file")
    sub.add_argument("--cap-elements", type=int, default=None,
                     help=f"closure cap (default {DEFAULT_CAP}, env TREEGRP_CAP_ELEMENTS)")
    sub.add_argument("--cap-states", type=int, default=machines.DEFAULT_STATE_CAP,
                     help="section-word exploration cap")
    sub.add_argument("--max-iter", type=int, default=64, help="nucleus iteration cap")
    sub.add_argument("--format", choices=["json", "text", "dot"], default="json")
    sub.add_argument("--out", help="write the report to a file")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="treegrp",
        description="compute with finite-state tree automorphisms and "
        "forbidden-pattern groups",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("patterns", help="essential windows of a family's group")
    _add_common(p)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--list", action="store_true", help="include the full pattern list")
    p.set_defaults(func=cmd_patterns)

    p = subs.add_parser("closure", help="build and verify a branch presentation")
    _add_common(p)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--contracting", action="store_true")
    p.set_defaults(func=cmd_closure)

    p = subs.add_parser("quotient", help="level quotient: order, generator bounds")
    _add_common(p)
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(func=cmd_quotient)

    p = subs.add_parser("membership", help="test an element against constraints")
    _add_common(p)
    p.add_argument("--element", required=True)
    p.set_defaults(func=cmd_membership)

    p = subs.add_parser("nucleus", help="nucleus of a family's group")
    _add_common(p)
    p.set_defaults(func=cmd_nucleus)

    p = subs.add_parser("check-group", help="subgroup criterion for a constraint system")
    _add_common(p)
    p.set_defaults(func=cmd_check_group)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
