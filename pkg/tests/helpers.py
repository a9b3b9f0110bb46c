"""Randomized structured-mesh cases built directly from grid coordinates.

Loops, walls and seed elements here are computed from (row, col) lattice
positions, independently of the library's walking and decomposition code.
"""
import numpy as np

from panelize.fixtures import grid_node, structured_mesh


class GridCase:
    def __init__(self, rng, rows, cols, relabel=True):
        self.rows, self.cols = rows, cols
        self.flip = rng.random((rows, cols)) < 0.5
        self.ids = None
        if relabel:
            n = 2 * rows * cols
            perm = rng.permutation(n) + 1
            self.ids = {i + 1: int(perm[i]) * 3 + 7 for i in range(n)}
        self.mesh = structured_mesh(rows, cols, flip=self.flip, element_ids=self.ids)

    def node(self, r, c):
        return grid_node(r, c, self.cols)

    def cell_element(self, r, c, k):
        eid = 2 * (r * self.cols + c) + 1 + k
        return self.ids[eid] if self.ids else eid

    def random_cut(self, rng):
        """Left-to-right lattice path through rows 1..rows-1, never revisiting a node."""
        rows, cols = self.rows, self.cols
        r = int(rng.integers(1, rows))
        path = [(r, 0)]
        for c in range(cols):
            # no vertical run on the left border column: it would overlap the border
            target = int(rng.integers(1, rows)) if c > 0 else r
            step = 1 if target > r else -1
            while r != target:
                r += step
                path.append((r, c))
            up_ok = r + 1 <= rows - 1 and not self.flip[r][c]
            down_ok = r - 1 >= 1 and self.flip[r - 1][c]
            move = rng.integers(3)
            if move == 1 and up_ok:
                r += 1
            elif move == 2 and down_ok:
                r -= 1
            path.append((r, c + 1))
        return path

    def cut_loops(self, cut):
        """Lower and upper boundary loops (as node ids) for a left-right cut."""
        rows, cols = self.rows, self.cols
        r0, r1 = cut[0][0], cut[-1][0]
        lower = [(0, c) for c in range(cols + 1)]
        lower += [(r, cols) for r in range(1, r1)]
        lower += cut[::-1]
        lower += [(r, 0) for r in range(r0 - 1, 0, -1)]
        upper = list(cut)
        upper += [(r, cols) for r in range(r1 + 1, rows + 1)]
        upper += [(rows, c) for c in range(cols - 1, -1, -1)]
        upper += [(r, 0) for r in range(rows - 1, r0, -1)]
        to_ids = lambda ring: tuple(self.node(r, c) for r, c in ring)
        return to_ids(lower), to_ids(upper)

    def lower_seed(self):
        return self.cell_element(0, 0, 0)

    def upper_seed(self):
        return self.cell_element(self.rows - 1, 0, 1)

    def random_rectangle(self, rng):
        """Axis-aligned interior loop plus the element inside its lower-left corner."""
        r_lo, r_hi = sorted(rng.choice(np.arange(1, self.rows), size=2, replace=False))
        c_lo, c_hi = sorted(rng.choice(np.arange(1, self.cols), size=2, replace=False))
        ring = [(r_lo, c) for c in range(c_lo, c_hi + 1)]
        ring += [(r, c_hi) for r in range(r_lo + 1, r_hi + 1)]
        ring += [(r_hi, c) for c in range(c_hi - 1, c_lo - 1, -1)]
        ring += [(r, c_lo) for r in range(r_hi - 1, r_lo, -1)]
        loop = tuple(self.node(r, c) for r, c in ring)
        return loop, self.cell_element(r_lo, c_lo, 0)


def loop_walls(loop):
    return {tuple(sorted((loop[i], loop[(i + 1) % len(loop)]))) for i in range(len(loop))}
