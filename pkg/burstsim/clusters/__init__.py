from .base import BatchCluster, QueueEntry, EntryState, TERMINAL_STATES, plan_pass, plan_start
from .hpc import HpcCluster
from .cloud import CloudPool, CloudQueueEntry, VmInstance, VmState, ScaleAction, STAGE_NAMES
