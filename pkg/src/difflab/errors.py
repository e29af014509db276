"""Exception types shared across the package.

Everything user-facing derives from DifflabError so the CLI can map it to
exit status 1; anything else escaping to the top level is an internal
error (status 2).
"""


class DifflabError(Exception):
    """Base class for expected, user-reportable failures."""


# repository / store

class InvalidRepository(DifflabError):
    pass


class RepositoryLocked(DifflabError):
    pass


class NotFound(DifflabError):
    pass


class SchemaViolation(DifflabError):
    pass


class UnknownCampaign(NotFound):
    pass


class MissingVerdicts(DifflabError):
    pass


# corpus

class UnknownUid(NotFound):
    pass


class UnknownBase(DifflabError):
    pass


class BaseIsVariant(DifflabError):
    pass


class EmptySource(DifflabError):
    pass


class FamilyExists(DifflabError):
    pass


class DuplicateVariantIndex(DifflabError):
    pass


# runner

class ExecutorNotFound(DifflabError):
    pass


# oracle

class EmptyInput(DifflabError):
    pass


class DuplicateConfig(DifflabError):
    pass


class MissingBaseRecord(DifflabError):
    pass


class MissingConfigLabel(DifflabError):
    pass
