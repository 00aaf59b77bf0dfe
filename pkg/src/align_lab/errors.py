"""Exception types raised across the package.

Every error derives from :class:`AlignLabError` (itself a ``ValueError``), so
callers can catch the whole family at once.  The CLI maps them onto exit
codes via :attr:`AlignLabError.exit_code`.
"""


class AlignLabError(ValueError):
    exit_code = 2


class NegativeEntry(AlignLabError):
    pass


class SumNotOne(AlignLabError):
    pass


class DegenerateMarginal(AlignLabError):
    pass


class DimensionMismatch(AlignLabError):
    pass


class ZeroEntry(AlignLabError):
    pass


class NonpositiveCorrelation(AlignLabError):
    pass


class NTooLarge(AlignLabError):
    exit_code = 3


class NTooSmall(AlignLabError):
    pass


class LTooLarge(AlignLabError):
    pass


class OrbitTooLarge(AlignLabError):
    pass


class PsiOutOfRange(AlignLabError):
    pass


class ZOutOfRange(AlignLabError):
    pass


class DegenerateInput(AlignLabError):
    pass


class ZeroPairProbability(AlignLabError):
    pass
