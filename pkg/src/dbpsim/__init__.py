"""dbpsim: rule- and context-driven dynamic business process simulation.

Processes here have no predefined activity sequence: every next activity is
chosen at runtime by matching rules against the current internal and external
context, historical traces labeled bad practice are vetoed, and rules,
context, and activities are all editable in the middle of a paused instance.
"""

from .activities import Activity, ExecutionRecord, SelectionOutcome
from .context import ContextSnapshot, ExternalContext, ExternalEvent, InternalContext
from .engine import Command, DivergenceError, Session, SessionFault, Status
from .history import CompletionStatus, HistoricalInstance, HistoryStore, Label
from .rules import Rule, RuleKind, RuleSet, parse_expr, parse_rule, print_rule
from .scenario import Scenario, ValidationError, load_scenario, scenario_hash

__version__ = "0.1.0"

__all__ = [
    "Activity",
    "Command",
    "CompletionStatus",
    "ContextSnapshot",
    "DivergenceError",
    "ExecutionRecord",
    "ExternalContext",
    "ExternalEvent",
    "HistoricalInstance",
    "HistoryStore",
    "InternalContext",
    "Label",
    "Rule",
    "RuleKind",
    "RuleSet",
    "Scenario",
    "SelectionOutcome",
    "Session",
    "SessionFault",
    "Status",
    "ValidationError",
    "load_scenario",
    "parse_expr",
    "parse_rule",
    "print_rule",
    "scenario_hash",
]
