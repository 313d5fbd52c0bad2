"""
Exception hierarchy for the CP-ABE toolkit.

Each family carries the exit code the CLI reports: usage problems exit 2,
cryptographic or policy failures exit 3, storage failures exit 4.
"""


class CpabeError(Exception):
    exit_code = 1


class UsageError(CpabeError):
    exit_code = 2


class CryptoError(CpabeError):
    exit_code = 3


class StorageError(CpabeError):
    exit_code = 4


# pairing_backend
class UnsupportedSecurityLevel(UsageError):
    pass


class InvalidAttributeToken(UsageError):
    pass


class RandomnessUnavailable(CryptoError):
    pass


class InvalidGroupElement(CryptoError):
    pass


# access_policy
class PolicySyntaxError(UsageError):
    def __init__(self, position: int, message: str):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.message = message


class ThresholdOutOfRange(UsageError):
    pass


class PointNotInSet(CryptoError):
    pass


class DegenerateSet(CryptoError):
    pass


class NotSatisfied(CryptoError):
    pass


# cpabe_core
class EmptyAttributeSet(UsageError):
    pass


class PolicyNotSatisfied(CryptoError):
    pass


class MalformedCiphertext(CryptoError):
    pass


class AttributeMissing(CryptoError):
    pass


# hybrid_envelope
class IntegrityFailure(CryptoError):
    pass


class BadPadding(CryptoError):
    pass


class DekMismatch(CryptoError):
    pass


# containers and files
class CorruptContainer(StorageError):
    pass


class VersionUnsupported(StorageError):
    pass


class CorruptStore(StorageError):
    pass


class SetupMissing(StorageError):
    pass


# authority
class InvalidUniverse(UsageError):
    pass


class UnknownAttribute(UsageError):
    pass


class DuplicateUser(UsageError):
    pass


# docstore
class DuplicateField(UsageError):
    pass


class UnknownField(UsageError):
    pass


class NotDeterministicField(UsageError):
    pass


class InvalidFieldValue(UsageError):
    pass


# bench_harness
class InvalidBenchConfig(UsageError):
    pass
