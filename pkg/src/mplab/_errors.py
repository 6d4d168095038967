class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class ContractError(ValueError):
    """Precondition or structural contract violated by the caller."""
