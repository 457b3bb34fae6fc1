"""Multi-domain bandwidth orchestration fabric.

An orchestrator pulls versioned topology models from per-domain resource
managers, stitches them into a union graph, computes end-to-end designs for
intent requests (paths, VLANs, schedules), and drives a propagate/commit
two-phase push of reservation deltas back to the resource managers.
"""

__version__ = "0.1.0"
