"""vigil: behavior-classification pipeline around a pluggable 4-class model.

Core modules are importable directly; the HTTP surface lives in
``vigil.service`` and the command-line client in ``vigil.cli``.
"""

__version__ = "0.1.0"
