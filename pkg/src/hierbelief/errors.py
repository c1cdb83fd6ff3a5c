"""Exception taxonomy shared by all modules.

CLI exit codes: ConfigError/FormatError -> 2, DomainError/ShapeError/
InvalidLabelError/EmptyInputError -> 3, TrainingDivergedError -> 4.
"""


class HierBeliefError(Exception):
    """Base class for all library errors."""


class ConfigError(HierBeliefError):
    """Invalid configuration value or unusable parameter combination."""


class FormatError(ConfigError):
    """Malformed input file; message carries the offending line number."""


class DomainError(HierBeliefError):
    """Numeric argument outside the mathematical domain of an operation."""


class ShapeError(HierBeliefError):
    """Array length / label-space mismatch between coupled arguments."""


class InvalidLabelError(HierBeliefError):
    """Label index outside its label space."""


class EmptyInputError(HierBeliefError):
    """Operation requires at least one sample."""


class TrainingDivergedError(HierBeliefError):
    """Loss became non-finite; message carries epoch and batch context."""
