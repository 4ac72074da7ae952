"""Capacity-scaling service network design toolkit.

Plan cyclic freight schedules where peak demand exceeds the owned fleet:
generate instances, compute time-window requirement profiles, export the
exact arc-based model, solve with the multi-phase merge heuristic, and
verify external solver output.
"""

__version__ = "0.1.0"
