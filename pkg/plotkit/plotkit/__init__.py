"""plotkit: offline figures from oracle-arena result CSVs.

Five figure kinds, all reading the harness's uniform CSV schema:

* ``tradeoff``  -- measured (memory bits, oracle queries) per solver, log-log;
* ``rmt-hist``  -- smallest-singular-value histograms per band factor;
* ``rmt-sweep`` -- min/median smallest singular value vs band factor, with the
  threshold curve recomputed from the config embedded in the rows;
* ``tails``     -- empirical concentration tails against their bound curves;
* ``winrate``   -- game win rates per (game, player).

Rendering is read-only on inputs and pixel-deterministic for a fixed CSV and
spec (pinned style, hashed SVG ids, date-free metadata).
"""

__version__ = "0.1.0"

from .figures import FigureSpec, SchemaMismatchError, load_rows, render, tradeoff_points

__all__ = ["FigureSpec", "SchemaMismatchError", "load_rows", "render",
           "tradeoff_points", "__version__"]
