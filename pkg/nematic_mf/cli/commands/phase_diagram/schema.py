from pathlib import Path
from typing import Optional

from loguru import logger
from pydantic import BaseModel

from nematic_mf.cli.output import CommandResult, write_csv, write_json
from nematic_mf.solvers.continuation import BifurcationEvent, PhaseDiagram

BRANCH_COLUMNS = ("beta", "xi", "dF_dxi", "stable", "residual", "branch_kind")


class BranchRow(BaseModel):
    """One branch point as a table row."""

    beta: float
    xi: float
    dF_dxi: float  # noqa: N815
    stable: bool
    residual: float
    branch_kind: str


class PhaseDiagramResponse(CommandResult):
    """Branch table and refined events."""

    events: list[BifurcationEvent]
    branches: list[BranchRow]

    @classmethod
    def from_diagram(cls, diagram: PhaseDiagram) -> "PhaseDiagramResponse":
        """
        Flattens the branches into rows, branch by branch.

        :param diagram: traced phase diagram.
        :returns: response.
        """
        rows = [
            BranchRow(
                beta=point.beta,
                xi=point.xi,
                dF_dxi=point.dF_dxi,
                stable=point.stable,
                residual=point.residual,
                branch_kind=branch.kind.value,
            )
            for branch in diagram.branches
            for point in branch.points
        ]
        return cls(events=diagram.events, branches=rows)

    def write(self, out: Optional[Path] = None) -> None:
        """
        JSON to stdout, or branches.csv and events.json inside out.

        :param out: output directory.
        """
        if out is None:
            super().write(None)
            return
        out.mkdir(parents=True, exist_ok=True)
        branches_csv = out / "branches.csv"
        events_json = out / "events.json"
        write_csv(branches_csv, BRANCH_COLUMNS, (row.model_dump() for row in self.branches))
        write_json([event.model_dump(mode="json") for event in self.events], events_json)
        logger.info("wrote {} rows and {} events to {}", len(self.branches), len(self.events), out)
        write_json(
            {
                "branches_csv": str(branches_csv),
                "events_json": str(events_json),
                "rows": len(self.branches),
                "events": len(self.events),
            },
        )
