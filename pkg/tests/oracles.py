"""Independent brute-force oracles the tests check the implementation against.

These deliberately avoid importing from the package; each one re-derives its
result with plain loops / stdlib arithmetic.
"""

import hashlib
import math


def oracle_seeded_vector(tag: bytes, dim: int) -> list[float]:
    """Reimplementation of the fixture vector generator.

    Normalization divides by the correctly-rounded IEEE sqrt (math.sqrt);
    x ** 0.5 may differ by 1 ulp and is not part of the pinned algorithm.
    """
    digest = hashlib.sha256(tag).digest()
    s = int.from_bytes(digest[:8], "big")
    if s == 0:
        s = 0x9E3779B97F4A7C15
    out = []
    for _ in range(dim):
        s = (s ^ (s << 13)) % 2**64
        s = s ^ (s >> 7)
        s = (s ^ (s << 17)) % 2**64
        out.append(2.0 * (s / 2**64) - 1.0)
    norm = math.sqrt(sum(v * v for v in out))
    return [v / norm for v in out]


def oracle_cosine(u, v) -> float:
    """Plain double-loop cosine; zero norm on either side yields 0."""
    dot = 0.0
    nu = 0.0
    nv = 0.0
    for a, b in zip(u, v):
        dot += a * b
        nu += a * a
        nv += b * b
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu**0.5 * nv**0.5)


def oracle_similarity(tokens, concepts) -> list[list[float]]:
    """T x K cosine matrix via the double loop."""
    return [[oracle_cosine(u, v) for v in concepts] for u in tokens]


def oracle_logits(W, b, x) -> list[float]:
    """Matrix-vector product with explicit loops."""
    out = []
    for k in range(len(W)):
        acc = b[k]
        for j in range(len(x)):
            acc += W[k][j] * x[j]
        out.append(acc)
    return out


def oracle_top_k(entries, query_vec, k):
    """Exhaustive-scan retrieval oracle.

    entries: list of (doc_id, chunk_index, vector). Returns the top-k
    (doc_id, chunk_index, score) sorted by score desc, ties by
    (doc_id, chunk_index) asc.
    """
    scored = []
    for doc_id, chunk_index, vec in entries:
        score = oracle_cosine(query_vec, vec)
        score = max(-1.0, min(1.0, score))
        scored.append((doc_id, chunk_index, score))
    scored.sort(key=lambda t: (-t[2], t[0], t[1]))
    return scored[:k]


def oracle_bilinear_upsample(grid, width, height) -> list[list[int]]:
    """Half-pixel-center bilinear resample of a [0,1] grid to width x height
    8-bit pixels, rounding half up."""
    grid_h = len(grid)
    grid_w = len(grid[0])
    out = []
    for y in range(height):
        row = []
        gy = (y + 0.5) * grid_h / height - 0.5
        gy = min(max(gy, 0.0), grid_h - 1.0)
        y0 = int(gy)
        y1 = min(y0 + 1, grid_h - 1)
        fy = gy - y0
        for x in range(width):
            gx = (x + 0.5) * grid_w / width - 0.5
            gx = min(max(gx, 0.0), grid_w - 1.0)
            x0 = int(gx)
            x1 = min(x0 + 1, grid_w - 1)
            fx = gx - x0
            value = (1 - fy) * ((1 - fx) * grid[y0][x0] + fx * grid[y0][x1]) + fy * (
                (1 - fx) * grid[y1][x0] + fx * grid[y1][x1]
            )
            row.append(int(255.0 * value + 0.5))
        out.append(row)
    return out
