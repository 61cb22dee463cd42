"""Exception hierarchy shared across the package."""


class CbmRagError(Exception):
    """Base class for all package-specific errors."""


# --- provider errors -------------------------------------------------------

class ProviderError(CbmRagError):
    pass


class RemoteUnavailable(ProviderError):
    """Remote provider kept failing after exhausting all retries."""


class DimensionMismatch(ProviderError):
    """Embedding dimensions disagree (within a response, across calls, or between embedding spaces)."""


class EmptyInput(ProviderError):
    pass


class UnsupportedMediaType(ProviderError):
    pass


class MalformedResponse(ProviderError):
    """Provider reply does not match the wire schema."""


class ScriptExhausted(ProviderError):
    """Scripted completion oracle ran out of replies."""


# --- concept-bottleneck errors ---------------------------------------------

class OutOfRange(CbmRagError):
    pass


class ConceptSetMismatch(CbmRagError):
    pass


class UnknownClassLabel(CbmRagError):
    pass


class IndexOutOfRange(CbmRagError):
    pass


class EmptyClass(CbmRagError):
    pass


class InconsistentConceptSet(CbmRagError):
    pass


class EmptyDataset(CbmRagError):
    pass


class CorruptFile(CbmRagError):
    """Persisted file failed a version or schema gate."""


# --- retrieval-store errors -------------------------------------------------

class InvalidChunkParams(CbmRagError):
    pass


class DuplicateDocument(CbmRagError):
    pass


class UnknownStore(CbmRagError):
    pass


class IoFailure(CbmRagError):
    pass


class CorruptStore(CorruptFile):
    pass


# --- agent errors ------------------------------------------------------------

class ParseFailure(CbmRagError):
    """Model output did not follow the Thought/Action/Action Input grammar."""


class MalformedReport(CbmRagError):
    """Report text is missing one of the required sections."""


# --- service errors -----------------------------------------------------------

class UnknownSession(CbmRagError):
    pass


class NoAnalysis(CbmRagError):
    pass


class UnknownConcept(CbmRagError):
    pass


class ScoreOutOfRange(CbmRagError):
    pass


class StorageFailure(CbmRagError):
    pass
