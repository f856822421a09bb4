"""Abstract resource counters."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass
class CostLedger:
    """Counts of abstract resources spent by an operation.

    One swap shot is unit cost regardless of the Fock cutoff. Each ledger is
    owned by a single task; parallel subtasks get their own and are merged.
    """

    kernel_evals: int = 0
    state_preps: int = 0
    swap_shots: int = 0
    wall_time_ns: int = 0

    def merge(self, other: CostLedger) -> CostLedger:
        return CostLedger(
            self.kernel_evals + other.kernel_evals,
            self.state_preps + other.state_preps,
            self.swap_shots + other.swap_shots,
            self.wall_time_ns + other.wall_time_ns,
        )

    __add__ = merge

    def absorb(self, other: CostLedger) -> None:
        """In-place merge, used at join points."""
        self.kernel_evals += other.kernel_evals
        self.state_preps += other.state_preps
        self.swap_shots += other.swap_shots
        self.wall_time_ns += other.wall_time_ns

    def snapshot(self) -> CostLedger:
        return CostLedger(**asdict(self))

    def to_dict(self) -> dict:
        return asdict(self)
