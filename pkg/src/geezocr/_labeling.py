"""Run-based two-pass union-find connected component labeling.

First pass scans rows, extracts horizontal runs, and unions runs that
contact runs of the previous row; the second pass resolves roots and
numbers components 1..count in raster order of first encounter.
"""

from __future__ import annotations

import numpy as np


def _find(parent: list[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def label_bits(bits: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label a 0/1 matrix; returns (int32 label image, component count)."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    h, w = bits.shape
    fg = bits != 0
    reach = 1 if connectivity == 8 else 0

    # run extraction: (start, end) inclusive per row
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = fg
    delta = np.diff(padded, axis=1)

    parent: list[int] = []
    row_runs: list[tuple[np.ndarray, np.ndarray, int]] = []
    prev_starts = prev_ends = None
    prev_ids: list[int] = []
    for r in range(h):
        starts = np.flatnonzero(delta[r] == 1)
        ends = np.flatnonzero(delta[r] == -1) - 1
        ids = list(range(len(parent), len(parent) + len(starts)))
        parent.extend(ids)
        if prev_starts is not None and len(starts) and len(prev_starts):
            i = j = 0
            while i < len(prev_starts) and j < len(starts):
                if starts[j] <= prev_ends[i] + reach and ends[j] + reach >= prev_starts[i]:
                    ra, rb = _find(parent, prev_ids[i]), _find(parent, ids[j])
                    if ra != rb:
                        if ra < rb:
                            parent[rb] = ra
                        else:
                            parent[ra] = rb
                # advance whichever run finishes first
                if prev_ends[i] + reach < ends[j] + reach:
                    i += 1
                else:
                    j += 1
        row_runs.append((starts, ends, r))
        prev_starts, prev_ends, prev_ids = starts, ends, ids

    labels = np.zeros((h, w), dtype=np.int32)
    final: dict[int, int] = {}
    count = 0
    run_idx = 0
    for starts, ends, r in row_runs:
        for s, e in zip(starts, ends):
            root = _find(parent, run_idx)
            lab = final.get(root)
            if lab is None:
                count += 1
                lab = count
                final[root] = lab
            labels[r, s : e + 1] = lab
            run_idx += 1
    return labels, count
