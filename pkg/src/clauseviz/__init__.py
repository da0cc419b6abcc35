"""clauseviz: streaming visualization of SAT instances and clausal proofs.

CNF formulas become weighted variable-interaction graphs (ring reduction
or clique expansion), large graphs are coarsened by label propagation,
placed by a force-directed layout, and animated with a heat-map of
recently learned clauses streamed from a DRAT proof or a running solver.
"""

from .model import Clause, ClauseEvent, CnfFormula, EventKind, canonicalize
from .formats import parse_dimacs, parse_drat, write_dimacs, write_drat
from .graph import (GraphState, ReductionKind, WeightedGraph, WeightFunction,
                    reduce_clause)
from .contraction import ContractionHierarchy, build_hierarchy, contract_once
from .layout import LayoutConfig, Positions, layout, multilevel_layout
from .heat import HeatConfig, HeatMode, aggregate_heat, heat_to_color
from .session import (EventLog, FrameState, PlaybackStatus, Session,
                      SessionConfig, SessionRunner)
from .render import RenderStyle, export_sequence, render_png, render_svg

__version__ = "0.1.0"

__all__ = [
    "Clause", "ClauseEvent", "CnfFormula", "EventKind", "canonicalize",
    "parse_dimacs", "parse_drat", "write_dimacs", "write_drat",
    "GraphState", "ReductionKind", "WeightedGraph", "WeightFunction",
    "reduce_clause",
    "ContractionHierarchy", "build_hierarchy", "contract_once",
    "LayoutConfig", "Positions", "layout", "multilevel_layout",
    "HeatConfig", "HeatMode", "aggregate_heat", "heat_to_color",
    "EventLog", "FrameState", "PlaybackStatus", "Session", "SessionConfig",
    "SessionRunner",
    "RenderStyle", "export_sequence", "render_png", "render_svg",
    "__version__",
]
