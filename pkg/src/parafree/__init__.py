"""Decide parafreeness of graphs of free groups with cyclic edge groups."""

__version__ = "0.1.0"

from .criteria import check_amalgam, check_gog, check_hnn, not_proper_power_in  # noqa: E402
from .graph import GraphOfGroups, abelianization, decompose, expected_rank, validate  # noqa: E402
from .io import parse_instance  # noqa: E402
from .verdict import Determination, Status, Tri, Verdict  # noqa: E402
from .words import Alphabet  # noqa: E402

__all__ = [
    "Alphabet", "Determination", "GraphOfGroups", "Status", "Tri", "Verdict",
    "abelianization", "check_amalgam", "check_gog", "check_hnn", "decompose",
    "expected_rank", "not_proper_power_in", "parse_instance", "validate",
]
