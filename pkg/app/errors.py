from django.conf import settings


class Kas3Error(Exception):
    pass


class GuardExceeded(Kas3Error):
    def __init__(self, guard: str, limit: int, value: int):
        self.guard = guard
        self.limit = limit
        self.value = value
        super().__init__(f"guard {guard} exceeded: {value} > {limit}")


class NotAMatching(Kas3Error):
    pass


class MissingVertexData(Kas3Error):
    pass


class InvalidConfiguration(Kas3Error):
    pass


class CompositionError(Kas3Error):
    pass


class TripartitionError(Kas3Error):
    pass


class FoldError(Kas3Error):
    def __init__(self, exponent: int, e: int):
        self.exponent = exponent
        super().__init__(f"exponent {exponent} has odd residue {exponent % e} mod {e}")


class DependentRowsError(Kas3Error):
    pass


class SigningError(Kas3Error):
    pass


class CertificationError(Kas3Error):
    pass


class SchemaError(Kas3Error):
    pass


def guard_limit(name: str) -> int:
    return settings.KAS3["GUARDS"][name]


def check_guard(name: str, value: int) -> None:
    limit = guard_limit(name)
    if value > limit:
        raise GuardExceeded(name, limit, value)


def worker_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = settings.KAS3["THREADS"]
    return max(1, int(threads))
