"""Hybrid process frames: Declare constraints and Petri nets composed by projection."""

from .automata import Dfa, StateBudgetExceeded, equivalent, find_counterexample, minimize, product
from .core import START, EventLog, project
from .declare import Constraint, Template, compile_constraint, evaluate, parse_constraint
from .frame import ProcessFrame, Specification, frame_accepts, global_dfa, spec_dfa
from .miner import MinedModel, MinerConfig, mine, mined_dfa
from .petri import Marking, PetriNet, net_accepts, net_to_dfa

__version__ = "0.1.0"
