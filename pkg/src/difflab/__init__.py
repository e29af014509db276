"""difflab: differential compiler-testing campaigns over a reproducible
artifact repository.

Submodules are imported explicitly by consumers; nothing heavy (and in
particular no web framework) is pulled in at package import time, so the
mk-eval subprocess stays cheap to start.
"""

__version__ = "0.1.0"
