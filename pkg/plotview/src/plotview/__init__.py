"""Batch figure renderer for annular PIC run outputs.

Communicates with the simulator only through its documented CSV files:
diagnostics time series, density snapshots, and the convergence table.
"""

from .readers import (SchemaError, read_convergence, read_density_snapshot,
                      read_diagnostics)

__all__ = ["SchemaError", "read_convergence", "read_density_snapshot",
           "read_diagnostics"]
