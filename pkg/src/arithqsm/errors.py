"""Exception hierarchy shared by all engines.

Every error carries a stable ``exit_code`` so the command line layer can map
failures without a lookup table of its own.
"""

from __future__ import annotations


class ArithQSMError(Exception):
    exit_code = 2


class InputError(ArithQSMError, ValueError):
    """Malformed input (bad file, bad polynomial, out-of-range parameter)."""


class NonMonic(InputError):
    pass


class ZeroPolynomial(InputError):
    pass


class NotPrime(InputError):
    pass


class IntegerTooLarge(InputError):
    pass


class ReduciblePolynomial(InputError):
    pass


class SqrtInField(ReduciblePolynomial):
    """K(sqrt D) collapses to K because sqrt D already lies in K."""


class IrreducibilityUnknown(InputError):
    pass


class InvalidOverride(InputError):
    pass


class NotBadPrime(InputError):
    pass


class NotCoprime(InputError):
    pass


class LimitMismatch(InputError):
    pass


class BetaOutOfRange(InputError):
    pass


class NotFundamental(InputError):
    pass


class NotNegative(InputError):
    pass


class DiscriminantMismatch(InputError):
    pass


class InvalidPermutation(InputError):
    pass


class GroupTooLarge(InputError):
    pass


class NotSubgroup(InputError):
    pass


class IndexMismatch(InputError):
    pass


class MaskedIndex(InputError):
    pass


class UndeterminedPrime(ArithQSMError):
    exit_code = 3

    def __init__(self, primes):
        self.primes = sorted(primes)
        super().__init__(f"splitting undetermined at primes {self.primes}")


class NotEquivalent(ArithQSMError):
    exit_code = 1


class NetworkError(ArithQSMError):
    exit_code = 4


class UnknownLabel(ArithQSMError):
    exit_code = 5
