"""Hot accumulator kernels: compiled extension with a pure-Python fallback.

Rasterizing thousands of candidate lines across a multi-megacell vote
grid dominates extrinsic-stage runtime, so that loop lives in a Cython
extension.  When the extension was not built (no compiler, source
checkout) the numpy implementation in :mod:`.voting_py` takes over with
identical semantics; ``BACKEND`` records which one is active.

Run ``python benchmarks/bench_voting.py`` for a speed comparison.
"""

from . import voting_py

try:
    from . import _voting as _compiled
except ImportError:
    _compiled = None

if _compiled is not None:
    vote_segments = _compiled.vote_segments
    BACKEND = "compiled"
else:
    vote_segments = voting_py.vote_segments
    BACKEND = "python"

__all__ = ["vote_segments", "voting_py", "BACKEND"]
