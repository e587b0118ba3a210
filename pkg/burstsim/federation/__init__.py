from .wait_table import WaitTable, runtime_bin, node_bin, RUNTIME_BIN_LABELS, NODE_BIN_LABELS, DEFAULT_WAIT_TABLE
from .router import (
    Target,
    TARGET_ORDER,
    BurstDecision,
    Policy,
    HintOnly,
    AlwaysHpc,
    AlwaysCloud,
    DualSubmit,
    WaitThreshold,
    CostModel,
    POLICY_CLASS,
    load_policy,
    JobCopies,
    FederationRouter,
)
