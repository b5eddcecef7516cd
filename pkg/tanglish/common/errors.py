class TanglishError(RuntimeError):
    exit_code = 1


class ConfigError(TanglishError):
    exit_code = 2


class SchemaError(ConfigError):
    pass


class VocabNotFoundError(ConfigError):
    pass


class DataError(TanglishError):
    exit_code = 3


class CheckpointError(DataError):
    pass


class NumericError(TanglishError, ArithmeticError):
    exit_code = 4


class DimensionError(NumericError):
    pass
