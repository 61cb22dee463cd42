"""Fixed-stride document chunking with whitespace-aware end trimming.

Chunk starts are fixed at 0, step, 2*step, ... with step = max_chars - overlap;
a chunk is emitted iff its start lies inside the text. Each chunk initially
spans min(max_chars, remaining) characters; for every chunk except the last,
the end is pulled back to the last whitespace inside the window when that
whitespace sits strictly past the window's midpoint. Starts never move, so
pull-back shortens a chunk without shifting its successors.
"""

from dataclasses import dataclass

from ..errors import InvalidChunkParams

DEFAULT_MAX_CHARS = 1000
DEFAULT_OVERLAP = 200


@dataclass(frozen=True)
class DocumentChunk:
    doc_id: str
    chunk_index: int
    text: str
    start: int
    end: int

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("chunk end must be greater than start")
        if len(self.text) != self.end - self.start:
            raise ValueError("chunk text length must equal end - start")


def chunk_text(
    text: str,
    doc_id: str = "",
    max_chars: int = DEFAULT_MAX_CHARS,
    overlap: int = DEFAULT_OVERLAP,
) -> list[DocumentChunk]:
    if max_chars < 1 or overlap < 0 or overlap >= max_chars:
        raise InvalidChunkParams(
            f"need 0 <= overlap < max_chars, got max_chars={max_chars}, overlap={overlap}"
        )
    step = max_chars - overlap
    chunks: list[DocumentChunk] = []
    start = 0
    index = 0
    n = len(text)
    while start < n:
        window_end = min(start + max_chars, n)
        is_final = start + step >= n
        end = window_end
        if not is_final:
            window = text[start:window_end]
            ws = _last_whitespace(window)
            if ws is not None and ws > len(window) / 2:
                end = start + ws
        chunks.append(
            DocumentChunk(
                doc_id=doc_id,
                chunk_index=index,
                text=text[start:end],
                start=start,
                end=end,
            )
        )
        start += step
        index += 1
    return chunks


def _last_whitespace(window: str) -> int | None:
    for i in range(len(window) - 1, -1, -1):
        if window[i].isspace():
            return i
    return None
