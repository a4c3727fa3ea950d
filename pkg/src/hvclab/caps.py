"""Size caps that keep every stage within desk-scale limits."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Caps:
    max_layer_size: int = 50_000
    max_range: int = 8
    max_edges: int = 2_000_000
    solver_max_nodes: int = 1_000_000

    def to_json(self) -> dict:
        return {
            "max_layer_size": self.max_layer_size,
            "max_range": self.max_range,
            "max_edges": self.max_edges,
            "solver_max_nodes": self.solver_max_nodes,
        }


DEFAULT_CAPS = Caps()
