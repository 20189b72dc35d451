from .core import (SQL_TYPES, SQLGenerationError, compile_sql, gen_constraint_checks,
                   gen_table_sql, gen_trigger_sql, gen_view_sql, ident, literal, syntax_check)

__all__ = ["SQL_TYPES", "SQLGenerationError", "compile_sql", "gen_constraint_checks",
           "gen_table_sql", "gen_trigger_sql", "gen_view_sql", "ident", "literal", "syntax_check"]
