"""docdrift: find where code and its documentation disagree, by execution.

The pipeline generates unit tests purely from a function's documentation,
runs them against the real implementation, then regenerates the
implementation from the same documentation and reruns the tests. A function
is flagged only when some test fails on the real code but passes on the
regenerated code, and no test moves the other way.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
