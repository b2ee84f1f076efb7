"""
Exception hierarchy for dksel.

Everything raised on purpose derives from DkselError. ValidationError means the
caller handed us something we cannot work with (the CLI exits with 2),
SolverError means a solve went wrong internally (the CLI exits with 3).
"""


class DkselError(Exception):
    """Base class for all dksel errors"""
    exit_code = 1


class ValidationError(DkselError):
    exit_code = 2


class SolverError(DkselError):
    exit_code = 3


class ZeroRowError(ValidationError):
    """
    A pool row whose norm is too small to normalize
    """
    def __init__(self, index: int, norm: float = 0.0):
        self.index = index
        self.norm = norm
        super().__init__(f'row {index} has norm {norm:.3g} and cannot be normalized')


class NonFiniteError(ValidationError):
    """
    A pool row (or vector) containing NaN or Inf
    """
    def __init__(self, index: int):
        self.index = index
        super().__init__(f'row {index} contains NaN or Inf')


class DimensionMismatchError(ValidationError):
    def __init__(self, expected: int, got: int, what: str = 'query'):
        self.expected = expected
        self.got = got
        super().__init__(f'{what} has dimension {got}, expected {expected}')


class InvalidParamsError(ValidationError):
    pass


class UnknownMethodError(ValidationError):
    def __init__(self, method: str, known):
        self.method = method
        super().__init__(f"unknown method '{method}', expected one of: {', '.join(known)}")


class EmbeddingFileError(ValidationError):
    pass


class BadMagicError(EmbeddingFileError):
    def __init__(self, path, magic: bytes):
        self.magic = magic
        super().__init__(f'{path}: bad magic {magic!r}, expected DKSEL1')


class TruncatedFileError(EmbeddingFileError):
    """
    File ended before the header or the payload did; offset is the byte
    position where data ran out
    """
    def __init__(self, path, offset: int, expected: int):
        self.offset = offset
        self.expected = expected
        super().__init__(f'{path}: truncated at byte offset {offset}, expected {expected} bytes')


class TrailingDataError(EmbeddingFileError):
    def __init__(self, path, size: int, expected: int):
        self.size = size
        self.expected = expected
        super().__init__(f'{path}: {size - expected} unexpected bytes after payload')


class GoldFileError(ValidationError):
    def __init__(self, path, line: int, reason: str):
        self.line = line
        super().__init__(f'{path}:{line}: {reason}')


class TooLargeError(ValidationError):
    pass


class EmptyGoldError(ValidationError):
    def __init__(self):
        super().__init__('gold set is empty, recall is undefined')


class TooFewItemsError(ValidationError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f'ILAD needs at least 2 items, got {count}')


class NotIntegralError(ValidationError):
    pass


class InfeasibleSwapError(ValidationError):
    pass


class StaleCacheError(SolverError):
    def __init__(self, deviation: float, tolerance: float):
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(f'cached E^T x is stale: deviation {deviation:.3g} > {tolerance:.3g}')


class NegativeGapError(SolverError):
    def __init__(self, gap: float):
        self.gap = gap
        super().__init__(f'Frank-Wolfe gap is negative ({gap:.3g})')


class IterationCapReached(SolverError):
    """
    Raised only by strict solves. The best-so-far report is attached.
    """
    def __init__(self, report):
        self.report = report
        super().__init__(f'iteration cap reached after {report.iterations} iterations '
                         f'(gap {report.final_gap:.3g})')
