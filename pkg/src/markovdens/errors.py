"""Exception types raised by markovdens."""


class ConfigurationError(ValueError):
    """Invalid chain, basis, collection or benchmark configuration."""


class DomainError(ValueError):
    """Argument outside the domain of a mathematical function."""
