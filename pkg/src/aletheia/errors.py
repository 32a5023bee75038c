"""Exception hierarchy shared by every pipeline stage."""


class AletheiaError(Exception):
    """Base class for all pipeline errors."""


class UnknownLabel(AletheiaError):
    pass


class ProviderUnavailable(AletheiaError):
    """A provider could not be reached, or a replayed request was never recorded."""


class MalformedResponse(AletheiaError):
    pass


class FetchFailed(AletheiaError):
    pass


class OversizeBody(FetchFailed):
    pass


class UnsupportedContentType(AletheiaError):
    pass


class InterpretationParseError(AletheiaError):
    pass


class EmptyClaimText(AletheiaError):
    pass


class RetrievalEmpty(AletheiaError):
    pass


class ExtractionParseError(AletheiaError):
    pass


class VerdictParseError(AletheiaError):
    pass


class DatasetFormatError(AletheiaError):
    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        lines = "; ".join(f"line {n}: {msg}" for n, msg in problems)
        super().__init__(f"{len(problems)} malformed record(s): {lines}")


class AlignmentError(AletheiaError):
    pass


class ConfigError(AletheiaError):
    pass
