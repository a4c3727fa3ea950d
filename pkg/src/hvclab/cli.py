"""Command-line front end.

Every subcommand reads and writes the JSON formats of the library modules.
Exit codes: 0 on success, 1 on domain or parse errors, 2 when a size cap or
search budget is hit.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import game as gm
from . import layers as ly
from . import reduce as rd
from . import setfam as sf
from . import solve as sv
from .caps import Caps
from .errors import DomainError, HvcError, ParseError, PropertyViolation, ResourceError, SizeError
from .jsonio import dumps, frac_to_json, load_file, parse_fraction, write_file
from .pipeline import PipelineConfig, render_text, run_pipeline
from .vertexset import VertexSet

log = logging.getLogger("hvclab")


def _emit(obj, out):
    if out:
        write_file(out, obj)
    else:
        sys.stdout.write(dumps(obj))


def _load_game(path) -> gm.ProjectionGame:
    obj = load_file(path)
    if isinstance(obj, dict) and "base" in obj:
        obj = obj["base"]
    return gm.ProjectionGame.from_json(obj, str(path))


def _load_labeling(path) -> gm.GameLabeling:
    return gm.GameLabeling.from_json(load_file(path), str(path))


def _caps(args) -> Caps:
    return Caps(
        max_layer_size=args.max_layer_size,
        max_range=args.max_range,
        max_edges=args.max_edges,
        solver_max_nodes=getattr(args, "max_nodes", Caps.solver_max_nodes),
    )


def _load_hypergraph(path, caps) -> rd.LongCodeHypergraph:
    return rd.LongCodeHypergraph.from_json(load_file(path), str(path), caps)


def _load_generic(path, caps) -> sv.GenericHypergraph:
    obj = load_file(path)
    if isinstance(obj, dict) and "weights" in obj:
        return sv.GenericHypergraph.from_json(obj, str(path))
    if isinstance(obj, dict) and "source" in obj:
        hg = rd.LongCodeHypergraph.from_json(obj, str(path), caps)
        count = hg.count_edges()
        if count > caps.max_edges:
            raise SizeError(f"{count} hyperedges exceed the cap {caps.max_edges}")
        return sv.from_long_code(hg)
    raise ParseError(str(path), "<document>", "neither a generic nor a long-code hypergraph")


# family -------------------------------------------------------------------

def cmd_family_shift(args):
    fam = sf.SetFamily.from_json(load_file(args.input), args.input)
    if args.i is None and args.j is None:
        out = sf.left_shift_closure(fam)
    elif args.i is None or args.j is None:
        raise DomainError("give both --i and --j, or neither for the full closure")
    else:
        out = sf.ij_shift(fam, args.i, args.j)
    _emit(out.to_json(), args.out)


def cmd_family_check(args):
    fam = sf.SetFamily.from_json(load_file(args.input), args.input)
    ok, witness = sf.is_s_wise_t_intersecting(fam, args.s, args.t)
    _emit({"s": args.s, "t": args.t, "intersecting": ok, "witness": list(witness) if witness else None}, None)


def cmd_family_threshold(args):
    print(sf.intersection_threshold(parse_fraction(args.eps), args.s, parse_fraction(args.p)))


# game ---------------------------------------------------------------------

def cmd_game_gen(args):
    if args.scramble_from:
        base = _load_game(args.scramble_from)
        target = parse_fraction(args.soundness_target) if args.soundness_target else None
        _emit(gm.gen_scrambled(base, args.seed, target).to_json(), args.out)
        return
    g, plant = gm.gen_planted(args.y, args.z, args.ry, args.rz, args.degree, args.seed)
    if args.plant_out:
        write_file(args.plant_out, plant.to_json())
    _emit(g.to_json(), args.out)


def cmd_game_validate(args):
    problems = gm.validate(_load_game(args.input))
    _emit({"ok": not problems, "violations": problems}, None)
    if problems:
        return 1


def cmd_game_eval(args):
    value = gm.satisfied_fraction(_load_game(args.input), _load_labeling(args.labeling))
    _emit({"satisfied_fraction": frac_to_json(value)}, None)


# layers -------------------------------------------------------------------

def _build_layers(args):
    return ly.build_layered(_load_game(args.game), args.l, _caps(args))


def cmd_layers_build(args):
    _emit(_build_layers(args).summary(with_constraints=args.with_constraints), args.out)


def cmd_layers_lift(args):
    inst = _build_layers(args)
    lab = ly.lift_labeling(inst, _load_labeling(args.plant))
    _emit(lab.to_json(), args.out)


def cmd_layers_decode(args):
    inst = _build_layers(args)
    lab = ly.LayeredLabeling.from_json(load_file(args.labeling), args.labeling)
    res = ly.decode_to_game(inst, lab, args.i, args.j)
    _emit(
        {
            "labeling": res.labeling.to_json(),
            "base_fraction": frac_to_json(res.fraction),
            "layered_fraction": frac_to_json(ly.satisfied_fraction_between(inst, lab, args.i, args.j)),
        },
        args.out,
    )


def cmd_layers_density(args):
    inst = _build_layers(args)
    layer_list = tuple(int(v) for v in args.layers.split(","))
    delta = parse_fraction(args.delta)
    if args.sets:
        raw = load_file(args.sets)
        if not isinstance(raw, dict) or not isinstance(raw.get("sets"), list):
            raise ParseError(args.sets, "sets", "expected a list of variable-index lists")
        sets = [frozenset(s) for s in raw["sets"]]
    else:
        sets = ly.random_subsets(inst, layer_list, delta, args.seed)
    res = ly.weak_density_pair(inst, ly.WeakDensityQuery(delta, layer_list, tuple(sets)))
    _emit(
        {
            "j": res.j,
            "j_prime": res.j_prime,
            "layers": [layer_list[res.j], layer_list[res.j_prime]],
            "density": frac_to_json(res.density),
            "target": frac_to_json(delta**2 / 4),
        },
        args.out,
    )


# reduce -------------------------------------------------------------------

def cmd_reduce_build(args):
    inst = _build_layers(args)
    p = rd.bias_from_k_eps(args.k, parse_fraction(args.eps))
    _emit(rd.build_hypergraph(inst, args.k, p, _caps(args), args.mode).to_json(), args.out)


def cmd_reduce_witness(args):
    hg = _load_hypergraph(args.hypergraph, _caps(args))
    _emit(rd.completeness_witness(hg, _load_labeling(args.plant)).to_json(), args.out)


def cmd_reduce_check(args):
    hg = _load_hypergraph(args.hypergraph, _caps(args))
    vs = VertexSet.from_json(load_file(args.set), hg.weights, args.set)
    ok, edge = rd.is_independent(hg, vs)
    _emit({"independent": ok, "violating_edge": list(edge) if edge else None}, None)


def cmd_reduce_decode(args):
    hg = _load_hypergraph(args.hypergraph, _caps(args))
    vs = VertexSet.from_json(load_file(args.set), hg.weights, args.set)
    _emit(rd.decode_independent_set(hg, vs, parse_fraction(args.eps)).to_json(), args.out)


# solve --------------------------------------------------------------------

def cmd_solve_greedy(args):
    h = _load_generic(args.input, _caps(args))
    cover = sv.greedy_matching_cover(h, args.shuffle_seed)
    _emit({"kind": "vertex_cover", "vertices": cover.sorted(), "weight": frac_to_json(cover.weight),
           "optimal": False}, args.out)


def cmd_solve_exact(args):
    h = _load_generic(args.input, _caps(args))
    _emit(sv.exact_min_vc(h, args.max_nodes).to_json(), args.out)


# pipeline -----------------------------------------------------------------

def cmd_pipeline(args):
    cfg = PipelineConfig(
        k=args.k,
        epsilon=parse_fraction(args.eps),
        l=args.l,
        y_count=args.y,
        z_count=args.z,
        ry=args.ry,
        rz=args.rz,
        degree=args.degree,
        seed=args.seed,
        caps=_caps(args),
        mode=args.mode,
    )
    report = run_pipeline(cfg)
    _emit(report, args.out)
    text = render_text(report)
    if args.text:
        Path(args.text).write_text(text)
    elif args.out:
        sys.stdout.write(text)


def _add_caps(p, nodes=False):
    d = Caps()
    p.add_argument("--max-layer-size", type=int, default=d.max_layer_size)
    p.add_argument("--max-range", type=int, default=d.max_range)
    p.add_argument("--max-edges", type=int, default=d.max_edges)
    if nodes:
        p.add_argument("--max-nodes", type=int, default=d.solver_max_nodes)


def _add_layer_args(p):
    p.add_argument("--game", required=True, help="game JSON")
    p.add_argument("--l", type=int, required=True, help="number of layers")
    _add_caps(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hvclab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    top = parser.add_subparsers(dest="group", required=True)

    fam = top.add_parser("family", help="set-family tools").add_subparsers(dest="cmd", required=True)
    p = fam.add_parser("shift", help="(i,j)-shift, or full left-shift closure without --i/--j")
    p.add_argument("--input", required=True)
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_family_shift)
    p = fam.add_parser("check", help="s-wise t-intersecting test")
    p.add_argument("--input", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.set_defaults(func=cmd_family_check)
    p = fam.add_parser("threshold", help="intersection size t forcing weight below eps")
    p.add_argument("--eps", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--p", required=True)
    p.set_defaults(func=cmd_family_threshold)

    gam = top.add_parser("game", help="projection games").add_subparsers(dest="cmd", required=True)
    p = gam.add_parser("gen", help="planted game, or --scramble-from an existing game")
    p.add_argument("--y", type=int, default=4)
    p.add_argument("--z", type=int, default=2)
    p.add_argument("--ry", type=int, default=3)
    p.add_argument("--rz", type=int, default=2)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scramble-from")
    p.add_argument("--soundness-target")
    p.add_argument("--plant-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_game_gen)
    p = gam.add_parser("validate")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_game_validate)
    p = gam.add_parser("eval")
    p.add_argument("--input", required=True)
    p.add_argument("--labeling", required=True)
    p.set_defaults(func=cmd_game_eval)

    lay = top.add_parser("layers", help="layered instances").add_subparsers(dest="cmd", required=True)
    p = lay.add_parser("build")
    _add_layer_args(p)
    p.add_argument("--with-constraints", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_layers_build)
    p = lay.add_parser("lift")
    _add_layer_args(p)
    p.add_argument("--plant", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_layers_lift)
    p = lay.add_parser("decode")
    _add_layer_args(p)
    p.add_argument("--labeling", required=True, help="layered labeling JSON")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_layers_decode)
    p = lay.add_parser("density")
    _add_layer_args(p)
    p.add_argument("--delta", required=True)
    p.add_argument("--layers", required=True, help="comma-separated layer indices")
    p.add_argument("--sets", help='JSON {"sets": [[var, ...], ...]}; random sets when omitted')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_layers_density)

    red = top.add_parser("reduce", help="long-code hypergraph").add_subparsers(dest="cmd", required=True)
    p = red.add_parser("build")
    _add_layer_args(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--eps", required=True)
    p.add_argument("--mode", choices=rd.MODES, default="implicit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce_build)
    p = red.add_parser("witness")
    p.add_argument("--hypergraph", required=True)
    p.add_argument("--plant", required=True)
    p.add_argument("--out")
    _add_caps(p)
    p.set_defaults(func=cmd_reduce_witness)
    p = red.add_parser("check")
    p.add_argument("--hypergraph", required=True)
    p.add_argument("--set", required=True)
    _add_caps(p)
    p.set_defaults(func=cmd_reduce_check)
    p = red.add_parser("decode")
    p.add_argument("--hypergraph", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--out")
    _add_caps(p)
    p.set_defaults(func=cmd_reduce_decode)

    sol = top.add_parser("solve", help="vertex-cover solvers").add_subparsers(dest="cmd", required=True)
    p = sol.add_parser("greedy")
    p.add_argument("--input", required=True)
    p.add_argument("--shuffle-seed", type=int)
    p.add_argument("--out")
    _add_caps(p)
    p.set_defaults(func=cmd_solve_greedy)
    p = sol.add_parser("exact")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    _add_caps(p, nodes=True)
    p.set_defaults(func=cmd_solve_exact)

    d = PipelineConfig()
    p = top.add_parser("pipeline", help="end-to-end run with a JSON and text report")
    p.add_argument("--k", type=int, default=d.k)
    p.add_argument("--eps", default=str(d.epsilon))
    p.add_argument("--l", type=int, default=d.l)
    p.add_argument("--y", type=int, default=d.y_count)
    p.add_argument("--z", type=int, default=d.z_count)
    p.add_argument("--ry", type=int, default=d.ry)
    p.add_argument("--rz", type=int, default=d.rz)
    p.add_argument("--degree", type=int, default=d.degree)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--mode", choices=rd.MODES, default=d.mode)
    p.add_argument("--out", help="JSON report path (stdout when omitted)")
    p.add_argument("--text", help="text report path")
    _add_caps(p, nodes=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        code = args.func(args)
    except ResourceError as exc:
        print(f"hvclab: resource limit: {exc}", file=sys.stderr)
        return 2
    except (DomainError, PropertyViolation) as exc:
        where = " ".join(filter(None, (args.group, getattr(args, "cmd", None))))
        print(f"hvclab: {where}: {exc}", file=sys.stderr)
        return 1
    except HvcError as exc:
        print(f"hvclab: {exc}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
