"""circuitbench: a server-authoritative environment for controlled studies of
human problem solving on combinational logic-circuit reverse-engineering tasks.

Subpackages cover the pure circuit model (:mod:`circuitbench.circuit`), the
task file format and library (:mod:`circuitbench.tasks`), the per-session
study state machine (:mod:`circuitbench.engine`), the digital
number-connection test (:mod:`circuitbench.zvt`), log-derived performance
metrics and statistics (:mod:`circuitbench.analytics`), and the HTTP study
host (:mod:`circuitbench.server`).
"""

__version__ = "0.1.0"
