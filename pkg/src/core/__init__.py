from src.core.config import Settings, get_settings
from src.core.errors import DataError, NumericalError, TopicModelError, UsageError

__all__ = ["DataError", "NumericalError", "Settings", "TopicModelError", "UsageError", "get_settings"]
