"""End-to-end run: game -> layered instance -> long-code hypergraph -> solvers -> decoder."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .caps import Caps
from .errors import DomainError, HvcError, ResourceError, SizeError
from .game import brute_force_optimum, gen_planted, gen_scrambled, validate
from .jsonio import frac_to_json
from .layers import build_layered
from .reduce import (
    DESK_SCALE,
    bias_from_k_eps,
    build_hypergraph,
    completeness_witness,
    decode_independent_set,
    gap_identity,
    is_independent,
)
from .solve import exact_max_is, from_long_code, greedy_matching_cover

log = logging.getLogger(__name__)

BRUTE_FORCE_CAP = 200_000


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 3
    epsilon: Fraction = Fraction(1, 10)
    l: int = 2
    y_count: int = 2
    z_count: int = 1
    ry: int = 2
    rz: int = 2
    degree: int = 1
    seed: int = 7
    caps: Caps = field(default_factory=Caps)
    mode: str = "implicit"

    def validate(self) -> None:
        """Check every stage precondition before any work is done."""
        bias_from_k_eps(self.k, self.epsilon)
        if not 0 < Fraction(self.epsilon) < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.l < 2:
            raise DomainError(f"need at least two layers, got l={self.l}")
        if self.mode not in ("explicit", "implicit"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if min(self.y_count, self.z_count, self.degree) < 1:
            raise DomainError("variable counts and degree must be positive")
        if not 1 <= self.rz <= self.ry:
            raise DomainError(f"need 1 <= rz <= ry, got ry={self.ry}, rz={self.rz}")
        if (self.y_count * self.degree) % self.z_count:
            raise DomainError("y_count*degree must be divisible by z_count")
        for i in range(1, self.l + 1):
            size = self.z_count**i * self.y_count ** (self.l - i)
            if size > self.caps.max_layer_size:
                raise SizeError(f"layer {i} would have {size} variables, cap {self.caps.max_layer_size}")
            rng = self.rz**i * self.ry ** (self.l - i)
            if rng > self.caps.max_range:
                raise SizeError(f"layer {i} would have range {rng}, cap {self.caps.max_range}")

    def to_json(self) -> dict:
        out = asdict(self)
        out["epsilon"] = frac_to_json(self.epsilon)
        out["caps"] = self.caps.to_json()
        return out


def _ratio(a: Fraction, b: Fraction) -> dict:
    q = a / b
    return {"exact": frac_to_json(q), "float_diagnostic": float(q)}


def _solve_stage(hg, cfg: PipelineConfig, eps: Fraction) -> dict:
    edge_count = hg.count_edges()
    out = {"edge_count": edge_count}
    if edge_count > cfg.caps.max_edges:
        out["skipped"] = f"{edge_count} edges exceed cap {cfg.caps.max_edges}"
        return out
    gh = from_long_code(hg)
    greedy = greedy_matching_cover(gh)
    out["distinct_edges"] = len(gh.edges)
    out["greedy_cover_weight"] = frac_to_json(greedy.weight)
    try:
        indep, res = exact_max_is(gh, cfg.caps.solver_max_nodes)
    except ResourceError as exc:
        out["exact"] = {
            "status": "budget exhausted",
            "best_cover_weight": frac_to_json(exc.best_weight),
            "lower_bound": frac_to_json(exc.lower_bound),
            "nodes": exc.nodes,
        }
        return out
    out["exact"] = {
        "status": "optimal",
        "min_cover_weight": frac_to_json(res.cover.weight),
        "max_independent_weight": frac_to_json(indep.weight),
        "nodes": res.nodes,
    }
    out["greedy_over_exact"] = _ratio(greedy.weight, res.cover.weight)
    out["decode_max_independent"] = _try_decode(hg, indep, eps)
    return out


def _try_decode(hg, vs, eps) -> dict:
    if vs.weight < eps:
        return {"status": "skipped", "reason": f"weight {vs.weight} below epsilon {eps}"}
    try:
        return {"status": "ok", **decode_independent_set(hg, vs, eps).to_json()}
    except HvcError as exc:
        return {"status": "failed", "reason": str(exc)}


def run_pipeline(cfg: PipelineConfig) -> dict:
    cfg.validate()
    eps = Fraction(cfg.epsilon)
    p = bias_from_k_eps(cfg.k, eps)
    lhs, rhs = gap_identity(cfg.k, eps)
    seeds = {"planted": cfg.seed, "scrambled": cfg.seed + 1}
    log.info("pipeline seeds %s", seeds)
    game, plant = gen_planted(cfg.y_count, cfg.z_count, cfg.ry, cfg.rz, cfg.degree, seeds["planted"])
    scrambled = gen_scrambled(game, seeds["scrambled"])
    report = {
        "label": DESK_SCALE,
        "config": cfg.to_json(),
        "seeds": seeds,
        "parameters": {
            "p": frac_to_json(p),
            "one_minus_p": frac_to_json(1 - p),
            "gap_formula": frac_to_json(rhs),
            "gap_formula_float_diagnostic": float(rhs),
            "gap_identity_holds": lhs == rhs,
        },
    }
    for name, g in (("yes", game), ("scrambled", scrambled)):
        log.info("stage %s: layered instance", name)
        section = {"label": DESK_SCALE, "game_violations": validate(g)}
        if cfg.ry**cfg.y_count * cfg.rz**cfg.z_count <= BRUTE_FORCE_CAP:
            value, _ = brute_force_optimum(g, BRUTE_FORCE_CAP)
            section["game_optimum"] = frac_to_json(value)
        inst = build_layered(g, cfg.l, cfg.caps)
        section["layered"] = {
            "layer_sizes": [inst.layer_size(i) for i in range(1, cfg.l + 1)],
            "range_sizes": [inst.range_size(i) for i in range(1, cfg.l + 1)],
            "constraint_counts": {f"{i}-{j}": len(inst.phi[(i, j)]) for i, j in inst.pairs()},
        }
        hg = build_hypergraph(inst, cfg.k, p, cfg.caps, cfg.mode)
        section["hypergraph"] = {"vertices": hg.vertex_count}
        if name == "yes":
            witness = completeness_witness(hg, plant)
            ok, _ = is_independent(hg, witness)
            section["witness"] = {
                "weight": frac_to_json(witness.weight),
                "independent": ok,
                "complement_cover_weight": frac_to_json(1 - witness.weight),
                "decode": _try_decode(hg, witness, eps),
            }
        log.info("stage %s: solvers", name)
        section["solvers"] = _solve_stage(hg, cfg, eps)
        report[name] = section
    return report


def render_text(report: dict) -> str:
    """Human-readable summary; every figure is tagged as desk scale."""

    def q(obj):
        return f"{obj['num']}/{obj['den']}" if obj["den"] != 1 else str(obj["num"])

    tag = "[desk scale]"
    cfg = report["config"]
    par = report["parameters"]
    lines = [
        f"{tag} {DESK_SCALE}",
        f"{tag} k={cfg['k']} epsilon={q(cfg['epsilon'])} l={cfg['l']} seed={cfg['seed']}",
        f"{tag} p = {q(par['p'])}, 1-p = {q(par['one_minus_p'])}",
        f"{tag} gap (1-eps)(k-1-eps) = {q(par['gap_formula'])} (identity holds: {par['gap_identity_holds']})",
    ]
    for name in ("yes", "scrambled"):
        sec = report[name]
        lines.append(f"{tag} [{name}] layer sizes {sec['layered']['layer_sizes']}, "
                     f"hypergraph vertices {sec['hypergraph']['vertices']}")
        if "game_optimum" in sec:
            lines.append(f"{tag} [{name}] base game optimum {q(sec['game_optimum'])}")
        if "witness" in sec:
            wit = sec["witness"]
            lines.append(f"{tag} [{name}] witness weight {q(wit['weight'])}, independent {wit['independent']}")
            dec = wit["decode"]
            if dec["status"] == "ok":
                lines.append(f"{tag} [{name}] witness decode: layers {dec['layers']}, "
                             f"expected fraction {q(dec['expected_fraction'])}")
        sol = sec["solvers"]
        if "skipped" in sol:
            lines.append(f"{tag} [{name}] solvers skipped: {sol['skipped']}")
            continue
        lines.append(f"{tag} [{name}] greedy cover weight {q(sol['greedy_cover_weight'])}")
        ex = sol["exact"]
        if ex["status"] == "optimal":
            lines.append(f"{tag} [{name}] exact min cover {q(ex['min_cover_weight'])}, "
                         f"max independent {q(ex['max_independent_weight'])}, nodes {ex['nodes']}")
            lines.append(f"{tag} [{name}] greedy/exact {q(sol['greedy_over_exact']['exact'])}")
            dec = sol["decode_max_independent"]
            if dec["status"] == "ok":
                lines.append(f"{tag} [{name}] max-independent decode: layers {dec['layers']}, "
                             f"expected fraction {q(dec['expected_fraction'])}")
            else:
                lines.append(f"{tag} [{name}] max-independent decode {dec['status']}: {dec['reason']}")
        else:
            lines.append(f"{tag} [{name}] exact solver budget exhausted; best {q(ex['best_cover_weight'])}, "
                         f"bound {q(ex['lower_bound'])}")
    return "\n".join(lines) + "\n"
