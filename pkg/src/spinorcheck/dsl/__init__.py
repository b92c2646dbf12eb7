"""Index-notation expression language: parsing, planning and evaluation."""
from .parser import (Expression, ExpressionError, Factor, SymbolDecl, SymbolTable, Term, default_symbols,
                     format_expression, parse_expression)
from .planner import STRATEGIES, ContractionPlan, PlanNode, evaluate_expression, evaluate_plan, plan_contraction

__all__ = ["Expression", "ExpressionError", "Factor", "SymbolDecl", "SymbolTable", "Term", "default_symbols",
           "format_expression", "parse_expression", "STRATEGIES", "ContractionPlan", "PlanNode", "evaluate_expression",
           "evaluate_plan", "plan_contraction"]
