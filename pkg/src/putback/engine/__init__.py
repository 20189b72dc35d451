from .database import (ContradictoryDelta, Database, DeltaSet, apply_delta, db,
                       read_database, write_database)
from .evaluate import BOTTOM, constraint_violations, evaluate
from .put import (ConstraintViolation, build_putget_program, get, put, putdelta)
from .viewdelta import (Condition, DeleteWhere, InsertRow, UpdateWhere,
                        derive_view_delta, replay)

__all__ = [
    "ContradictoryDelta", "Database", "DeltaSet", "apply_delta", "db", "read_database",
    "write_database", "BOTTOM", "constraint_violations", "evaluate", "ConstraintViolation",
    "build_putget_program", "get", "put", "putdelta", "Condition", "DeleteWhere",
    "InsertRow", "UpdateWhere", "derive_view_delta", "replay",
]
