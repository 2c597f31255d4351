"""Command line entry point ``crossed-site``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

SCHEMA_VERSION = 1
DEFAULT_MAX_LEVEL = 5
CLASSIFY_CAP = 4
DELTA_CAP = 4

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"usage error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_max_level() -> int:
    env = os.environ.get("CROSSED_SITE_MAX_LEVEL")
    if env is None:
        return DEFAULT_MAX_LEVEL
    try:
        v = int(env)
    except ValueError:
        raise UsageError("CROSSED_SITE_MAX_LEVEL", f"not an integer: {env!r}") from None
    if v < 0:
        raise UsageError("CROSSED_SITE_MAX_LEVEL", "must be >= 0")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-level", type=int, default=None)
    p.add_argument("--word-cap", type=int, default=4)
    p.add_argument("--probe-cap", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--output", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crossed-site", description="Crossed groups over finite sites.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("verify", help="check the crossed-group axioms of a named family")
    p.add_argument("--family", required=True)
    p.add_argument("--site", required=True)
    _common(p)

    p = sub.add_parser("weyl", help="enumerate one level of the Weyl crossed group")
    p.add_argument("--site", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--elements", action="store_true")
    _common(p)

    p = sub.add_parser("classify", help="reproduce a classification table")
    p.add_argument("--table", type=int, required=True)
    _common(p)

    p = sub.add_parser("rtimes", help="monoidal laws of the semidirect product")
    p.add_argument("--site", default="aug-delta")
    p.add_argument("--objects", default="rep1,rep2,sym")
    _common(p)

    p = sub.add_parser("free-monoid", help="free crossed monoid on a sliced object")
    p.add_argument("--site", default="aug-delta")
    p.add_argument("--object", default="rep1")
    _common(p)

    p = sub.add_parser("base-change", help="Kan extensions along j or the interval functor")
    p.add_argument("--functor", required=True)
    p.add_argument("--direction", required=True)
    p.add_argument("--input", required=True)
    _common(p)

    p = sub.add_parser("goursat", help="Goursat analysis of the interval Weyl group")
    _common(p)

    p = sub.add_parser("subgroup-gen", help="crossed subgroup generated by elements")
    p.add_argument("--site", required=True)
    p.add_argument("--generator", action="append", default=[], metavar="LEVEL:INDEX")
    _common(p)
    return parser


# --- helpers -------------------------------------------------------------------------


def _site(args):
    from .finite_site import SiteId
    try:
        return SiteId.parse(args.site)
    except ValueError as e:
        raise UsageError("--site", str(e)) from None


def _max_level(args, cap: int | None = None, default: int | None = None) -> int:
    if args.max_level is None:
        L = _default_max_level() if default is None else default
        return L if cap is None else min(L, cap)
    if args.max_level < 0:
        raise UsageError("--max-level", "must be >= 0")
    if cap is not None and args.max_level > cap:
        raise UsageError("--max-level", f"at most {cap} is supported here")
    return args.max_level


def _validate_common(args) -> None:
    if args.word_cap < 1:
        raise UsageError("--word-cap", "must be >= 1")
    if args.probe_cap is not None and args.probe_cap < 1:
        raise UsageError("--probe-cap", "must be >= 1")
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads", "must be >= 1")


def _check_ints(obj, path="$"):
    """JSON output carries no floating point values."""
    if isinstance(obj, float):
        raise AssertionError(f"float at {path}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_ints(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_ints(v, f"{path}[{i}]")


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        body = dict(payload)
        body["schema_version"] = SCHEMA_VERSION
        body["command"] = args.command
        _check_ints(body)
        out = json.dumps(body, sort_keys=True, indent=2) + "\n"
    else:
        out = text if text.endswith("\n") else text + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


# --- subcommands ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .crossed_core import verify_crossed_axioms
    from .finite_site import SiteId
    from .standard_families import FAMILY_BUILDERS, FAMILY_SITES, family_table
    site = _site(args)
    if args.family not in FAMILY_BUILDERS:
        raise UsageError("--family", f"unknown family {args.family!r}; choose from {', '.join(sorted(FAMILY_BUILDERS))}")
    if site not in FAMILY_SITES[args.family]:
        raise UsageError("--family", f"{args.family} is not a crossed group on {site.value}")
    L = _max_level(args)
    if site is SiteId.DELTA and L > DELTA_CAP:
        raise UsageError("--max-level", f"simplicial tables are limited to {DELTA_CAP}")
    G = family_table(args.family, site, L)
    rep = verify_crossed_axioms(G)
    payload = {"family": args.family, "site": site.value, "max_level": L, "orders": G.orders, **rep.to_json()}
    text = (f"{args.family} on {site.value} up to level {L}: orders {G.orders}\n"
            + "\n".join(f"  {k}: {v}" for k, v in sorted(rep.checked.items()))
            + f"\n{'PASS' if rep.passed else 'FAIL'} ({len(rep.violations)} violations)")
    _emit(args, payload, text)
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def weyl_closed_order(site, n: int) -> int:
    from .finite_site import SiteId
    if site is SiteId.AUG_DELTA:
        return 2 ** n * math.factorial(n)
    if site is SiteId.NABLA:
        return 2 ** (n + 1) * math.factorial(n)
    return 2 ** (n + 1) * math.factorial(n + 1)


def cmd_weyl(args) -> int:
    from .standard_families import weyl_members
    site = _site(args)
    if args.level < 0:
        raise UsageError("--level", "must be >= 0")
    try:
        perms, signs = weyl_members(site, args.level, args.probe_cap)
    except ValueError as e:
        raise UsageError("--probe-cap", str(e)) from None
    order = int(len(perms))
    expected = weyl_closed_order(site, args.level)
    payload = {"site": site.value, "level": args.level, "order": order, "closed_form_order": expected,
               "probe_cap": args.probe_cap if args.probe_cap is not None else args.level + 2}
    if args.elements:
        payload["elements"] = [{"sigma": p.tolist(), "signs": s.tolist()} for p, s in zip(perms, signs)]
    _emit(args, payload, f"W on {site.value} at level {args.level}: order {order} (closed form {expected})")
    return EXIT_OK if order == expected else EXIT_MISMATCH


def cmd_classify(args) -> int:
    from .classification import reproduce_table
    if args.table not in (1, 2, 3):
        raise UsageError("--table", "must be 1, 2 or 3")
    L = _max_level(args, cap=CLASSIFY_CAP)
    if L < 1:
        raise UsageError("--max-level", "must be >= 1 for classification")
    rep = reproduce_table(args.table, L)
    lines = [f"Table {args.table} (levels <= {rep.max_level}): {sum(r['matched'] for r in rep.rows)}"
             f"/{len(rep.rows)} rows matched"]
    for r in rep.rows:
        q = f"  {r['quadruple']}" if "quadruple" in r else ""
        lines.append(f"  {'ok ' if r['matched'] else 'BAD'} {r['name']:<24} {r['orders_by_level']}{q}")
    for u in rep.unmatched:
        lines.append(f"  unmatched: {u}")
    if "candidates" in rep.extra:
        for c in rep.extra["candidates"]:
            state = "closed" if c["nabla_closed"] else ("fails closure" if c["valid"] else "invalid")
            lines.append(f"  candidate {c['quadruple']}: {state}")
    _emit(args, rep.to_json(), "\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def _sliced(name: str, W):
    from .crossed_monoidal import group_as_sliced, representable_sliced
    from .standard_families import FAMILY_BUILDERS, FAMILY_SITES
    if name.startswith("rep") and name[3:].isdigit():
        k = int(name[3:])
        if k > W.max_level:
            raise UsageError("--objects", f"{name} is above the truncation")
        return representable_sliced(W, k, W.unit(k))
    if name in FAMILY_BUILDERS and W.site_id in FAMILY_SITES[name]:
        F = FAMILY_BUILDERS[name](W)
        return group_as_sliced(F.as_table(name), F.inclusion())
    raise UsageError("--objects", f"unknown object {name!r}")


def cmd_rtimes(args) -> int:
    from .crossed_monoidal import associativity_holds, rtimes, unit_laws_hold
    from .standard_families import weyl_table
    site = _site(args)
    L = _max_level(args, cap=3, default=3)
    W = weyl_table(site, L)
    names = [n for n in args.objects.split(",") if n]
    if not names:
        raise UsageError("--objects", "need at least one object")
    objs = [_sliced(n, W) for n in names]
    units = {n: unit_laws_hold(X) for n, X in zip(names, objs)}
    triples = []
    for i, X in enumerate(objs):
        for j, Y in enumerate(objs):
            for k, Z in enumerate(objs):
                triples.append({"objects": [names[i], names[j], names[k]],
                                "associative": associativity_holds(X, Y, Z),
                                "sizes": rtimes(rtimes(X, Y), Z).sizes})
    ok = all(units.values()) and all(t["associative"] for t in triples)
    payload = {"site": site.value, "max_level": L, "unit_laws": units, "triples": triples, "ok": ok}
    text = "\n".join([f"unit laws: {units}"] + [f"{t['objects']}: {'ok' if t['associative'] else 'FAIL'}"
                                               for t in triples])
    _emit(args, payload, text)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_free_monoid(args) -> int:
    from .crossed_monoidal import free_crossed_monoid, free_monoid_violations
    from .standard_families import weyl_table
    site = _site(args)
    L = _max_level(args, cap=3, default=2)
    W = weyl_table(site, L)
    X = _sliced(args.object, W)
    F = free_crossed_monoid(X, args.word_cap)
    counts = [F.count(a) for a in X.levels]
    check_len = min(args.word_cap, 3)
    viol = free_monoid_violations(F, check_len)
    payload = {"site": site.value, "max_level": L, "word_cap": args.word_cap, "object": args.object,
               "generators": X.sizes, "words": counts, "checked_length": check_len, "violations": viol,
               "ok": not viol}
    _emit(args, payload, f"words per level (cap {args.word_cap}): {counts}; laws "
                         f"{'ok' if not viol else 'FAIL'} up to length {check_len}")
    return EXIT_OK if not viol else EXIT_MISMATCH


def _load_input(path: str, site_hint):
    """Either a serialized table or ``{"family": ..., "site": ..., "max_level": ...}``."""
    from .crossed_core import table_from_json
    from .finite_site import SiteId
    from .standard_families import family_table
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError("--input", str(e)) from None
    if not isinstance(obj, dict):
        raise UsageError("--input", "expected a JSON object")
    try:
        if "family" in obj:
            site = SiteId.parse(obj.get("site", site_hint.value))
            return family_table(obj["family"], site, int(obj["max_level"]))
        return table_from_json(obj)
    except (KeyError, ValueError, TypeError) as e:
        raise UsageError("--input", f"cannot build a table: {e}") from None


def cmd_base_change(args) -> int:
    from . import base_change as bc
    from .crossed_core import verify_crossed_axioms
    from .crossed_monoidal import crossed_group_as_monoid
    if args.functor not in ("j", "J"):
        raise UsageError("--functor", "must be j or J")
    if args.direction not in ("lan", "ran"):
        raise UsageError("--direction", "must be lan or ran")
    F = bc.get_functor(args.functor)
    expect = F.source if args.direction == "ran" else F.target
    G = _load_input(args.input, expect)
    if G.site_id is not expect:
        raise UsageError("--input", f"expected a table on {expect.value}, got {G.site_id.value}")
    payload = {"functor": args.functor, "direction": args.direction, "input_orders": G.orders}
    if args.direction == "ran" and args.functor == "j":
        R = bc.ran_j(G)
        back = bc.restrict_crossed(F, R)
        ok = back.same_tables(G) and verify_crossed_axioms(R).passed
        payload.update(output_orders=R.orders, counit_iso=back.same_tables(G), table=R.to_json())
        text = f"j_* orders {R.orders}; counit iso {payload['counit_iso']}"
    elif args.direction == "ran":
        if G.signed is None:
            raise UsageError("--input", "the interval right adjoint needs a signed-permutation family")
        Mon = crossed_group_as_monoid(G)
        theta = [[1] * s for s in G.sizes]
        I = bc.ran_interval_monoid(Mon, theta)
        ok = I.is_valid() and not I.M.structure_violations()
        payload.update(output_sizes=I.sizes, valid=ok)
        text = f"interval right adjoint sizes {I.sizes}; valid {ok}"
    else:
        L = G.max_level
        M = crossed_group_as_monoid(bc.restrict_crossed(F, G))
        lan = bc.lan_crossed_monoid(M, F, G, args.word_cap)
        levels = []
        ok = True
        for a in range(L + 1):
            comps = lan.merge_components(a)
            entry = {"level": a, "letters": len(lan.letters(a)), "components": [len(c) for c in comps]}
            if F.is_fully_faithful() and a >= 1:
                u = lan.unit_map(a - 1)
                single = {(c,) for c in lan.letters(a)} | {()}
                bij = len(set(u)) == len(u) and set(u) == single
                entry["unit_bijective"] = bij
                ok = ok and bij
            levels.append(entry)
        payload.update(levels=levels)
        text = "\n".join(f"level {e['level']}: {e['letters']} letters, components {e['components']}"
                         + (f", unit bijective {e['unit_bijective']}" if "unit_bijective" in e else "")
                         for e in levels)
    payload["ok"] = bool(ok)
    _emit(args, payload, text)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_goursat(args) -> int:
    from .classification import (
        all_quintuples,
        candidate_quadruples,
        enumerate_crossed_subgroups,
        goursat_backward,
        goursat_forward,
        interval_setup,
        is_virtual_product,
    )
    L = _max_level(args, cap=CLASSIFY_CAP, default=3)
    S = interval_setup(L)
    vp, wit = is_virtual_product(S.JW, S.G1, S.G2)
    subs = enumerate_crossed_subgroups(S.JW)
    bf = all(goursat_backward(goursat_forward(S.JW, S.G1, S.G2, H, check=False)) == H for H in subs)
    qs = all_quintuples(S, L)
    fb = all(goursat_forward(S.JW, S.G1, S.G2, goursat_backward(Q), check=False) == Q for Q in qs)
    cands = candidate_quadruples(L, S)
    failing = sorted(c.label for c in cands if c.valid and not c.nabla_closed)
    ok = (vp and bf and fb and sum(c.valid for c in cands) == 8 and sum(c.nabla_closed for c in cands) == 6
          and failing == sorted(["(S,S;C2,C2)", "(*,*;C2,C2)"]))
    payload = {"max_level": L, "virtual_product": vp, "virtual_product_witness": wit,
               "subgroups": len(subs), "quintuples": len(qs), "backward_forward": bf, "forward_backward": fb,
               "candidates": [c.to_json() for c in cands], "ok": ok}
    lines = [f"virtual product: {vp}", f"subgroups {len(subs)}, quintuples {len(qs)}",
             f"round trips: {bf and fb}"]
    lines += [f"{c.label}: {'closed' if c.nabla_closed else 'fails closure' if c.valid else 'invalid'}"
              + (f" via {c.witness['morphism']}" if c.witness else "") for c in cands]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_subgroup_gen(args) -> int:
    from .crossed_core import generated_subgroup
    from .standard_families import FAMILY_BUILDERS, FAMILY_SITES, weyl_table
    site = _site(args)
    L = _max_level(args, cap=CLASSIFY_CAP, default=3)
    W = weyl_table(site, L)
    gens = []
    for g in args.generator:
        try:
            a, x = (int(v) for v in g.split(":"))
        except ValueError:
            raise UsageError("--generator", f"expected LEVEL:INDEX, got {g!r}") from None
        if not (0 <= a <= L and 0 <= x < W.sizes[a]):
            raise UsageError("--generator", f"{g} is not an element up to level {L}")
        gens.append((a, x))
    H = generated_subgroup(W, gens)
    names = sorted(n for n, b in FAMILY_BUILDERS.items() if site in FAMILY_SITES[n] and b(W) == H)
    payload = {"site": site.value, "max_level": L, "generators": [list(g) for g in gens],
               "orders": H.orders, "named_families": names}
    _emit(args, payload, f"orders {H.orders}; equals {', '.join(names) or 'no named family'}")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "weyl": cmd_weyl,
    "classify": cmd_classify,
    "rtimes": cmd_rtimes,
    "free-monoid": cmd_free_monoid,
    "base-change": cmd_base_change,
    "goursat": cmd_goursat,
    "subgroup-gen": cmd_subgroup_gen,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        _validate_common(args)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
