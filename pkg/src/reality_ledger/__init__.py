"""A UTXO ledger that keeps conflicting transactions and resolves them into realities."""

from .branches import MAIN_BRANCH, Branch, BranchView, NotABranch, TooLarge
from .conflicts import ConflictStructures, rebuild_from_ledger
from .ledger import AddResult, AddStatus, LedgerDag, LedgerState, RejectReason
from .pruning import (ConsistencyViolation, PruneConfig, PruneReport, minimal_confirmed_branch,
                      prune, reality_ledger, validate_consistent)
from .scenario import (EquivalenceFailure, ReplayReport, Scenario, ValidationFailure,
                       generate_scenario, replay, replay_ledger, run_pipeline, structural_digests)
from .selection import Selection, select_reality_branch_walk, select_reality_conflict_graph
from .tx import (Output, OutputRef, Transaction, TxSyntaxError, canonical_decode,
                 canonical_encode, make_genesis, transaction_id, validate_syntax)
from .weights import (AxiomViolation, WeightFn, check_axioms, min_hash_weight,
                      min_timestamp_weight, static_weight)

__all__ = [
    "MAIN_BRANCH", "Branch", "BranchView", "NotABranch", "TooLarge",
    "ConflictStructures", "rebuild_from_ledger",
    "AddResult", "AddStatus", "LedgerDag", "LedgerState", "RejectReason",
    "ConsistencyViolation", "PruneConfig", "PruneReport", "minimal_confirmed_branch",
    "prune", "reality_ledger", "validate_consistent",
    "EquivalenceFailure", "ReplayReport", "Scenario", "ValidationFailure",
    "generate_scenario", "replay", "replay_ledger", "run_pipeline", "structural_digests",
    "Selection", "select_reality_branch_walk", "select_reality_conflict_graph",
    "Output", "OutputRef", "Transaction", "TxSyntaxError", "canonical_decode",
    "canonical_encode", "make_genesis", "transaction_id", "validate_syntax",
    "AxiomViolation", "WeightFn", "check_axioms", "min_hash_weight",
    "min_timestamp_weight", "static_weight",
]
